use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Candidate, GaError, Result};
use crate::scoring::{score_checked, ScoreItem, ScorerError, ScorerRegistry, SegmentScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Mean of the metric against each reference translation.
    ReferenceBased,
    /// Metric against the source only (quality estimation).
    SourceBased,
    /// Mean of the metric against the pseudo-reference pool.
    MbrPseudoRefs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessComponent {
    pub metric: String,
    pub weight: f64,
    pub mode: ScoreMode,
}

impl FitnessComponent {
    pub fn new(metric: impl Into<String>, weight: f64, mode: ScoreMode) -> Self {
        Self {
            metric: metric.into(),
            weight,
            mode,
        }
    }
}

/// Weighted sum of metric components. Negative weights turn a component into
/// an adversarial target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessSpec {
    pub components: Vec<FitnessComponent>,
}

impl FitnessSpec {
    pub fn new(components: Vec<FitnessComponent>) -> Self {
        Self { components }
    }

    pub fn single(metric: impl Into<String>, mode: ScoreMode) -> Self {
        Self::new(vec![FitnessComponent::new(metric, 1.0, mode)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(GaError::InvalidSpec("at least one component is required".into()));
        }
        if let Some(c) = self.components.iter().find(|c| !c.weight.is_finite()) {
            return Err(GaError::InvalidSpec(format!("weight of '{}' is not finite", c.metric)));
        }
        Ok(())
    }

    pub fn has_negative_weight(&self) -> bool {
        self.components.iter().any(|c| c.weight < 0.0)
    }

    /// Components with positive weight: the metrics being optimized.
    pub fn optimized(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&i| self.components[i].weight > 0.0).collect()
    }

    /// Components with negative weight: the held-out metrics being attacked.
    pub fn adversarial(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&i| self.components[i].weight < 0.0).collect()
    }
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Source sentence, references and pseudo-reference pool of one example.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitnessContext {
    pub source: String,
    pub references: Vec<String>,
    /// Frozen to the initial candidates unless `evolving_pool` is set.
    pub pseudo_refs: Vec<String>,
    pub evolving_pool: bool,
}

impl FitnessContext {
    pub fn new<R: AsRef<str>, C: AsRef<str>>(source: &str, references: &[R], initials: &[C]) -> Self {
        Self {
            source: source.to_owned(),
            references: references.iter().map(|r| r.as_ref().to_owned()).collect(),
            pseudo_refs: initials.iter().map(|c| normalize(c.as_ref())).collect(),
            evolving_pool: false,
        }
    }
}

/// Scores candidates under a [`FitnessSpec`], caching component scores by
/// exact candidate text.
pub struct FitnessEvaluator {
    spec: FitnessSpec,
    scorers: Vec<Arc<dyn SegmentScorer>>,
    context: FitnessContext,
    parallel: bool,
    cache: HashMap<String, Vec<f64>>,
    scored: usize,
}

impl FitnessEvaluator {
    pub fn new(spec: FitnessSpec, registry: &ScorerRegistry, context: FitnessContext) -> Result<Self> {
        spec.validate()?;
        let mut scorers = Vec::with_capacity(spec.components.len());
        for c in &spec.components {
            let scorer = registry.get(&c.metric).map_err(|source| GaError::Scorer {
                component: c.metric.clone(),
                source,
            })?;
            match c.mode {
                ScoreMode::ReferenceBased if context.references.is_empty() => {
                    return Err(GaError::MissingReference(c.metric.clone()));
                }
                ScoreMode::MbrPseudoRefs if context.pseudo_refs.is_empty() => {
                    return Err(GaError::TooFewPseudoReferences(c.metric.clone()));
                }
                _ => {}
            }
            scorers.push(scorer);
        }
        Ok(Self {
            spec,
            scorers,
            context,
            parallel: false,
            cache: HashMap::new(),
            scored: 0,
        })
    }

    /// Fan built-in scorers out over threads. Output is identical either way.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn spec(&self) -> &FitnessSpec {
        &self.spec
    }

    pub fn context(&self) -> &FitnessContext {
        &self.context
    }

    /// Number of distinct candidate texts sent to the scorers so far.
    pub fn scored_count(&self) -> usize {
        self.scored
    }

    /// Swaps the pseudo-reference pool (evolving-pool variant); clears the cache.
    pub fn set_pseudo_refs<S: AsRef<str>>(&mut self, pool: &[S]) {
        self.context.pseudo_refs = pool.iter().map(|s| normalize(s.as_ref())).collect();
        self.cache.clear();
    }

    pub fn combine(&self, component_scores: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, s) in self.spec.components.iter().zip(component_scores) {
            acc += c.weight * s;
        }
        acc
    }

    fn pseudo_refs_for(&self, text: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::with_capacity(self.context.pseudo_refs.len());
        let mut excluded = false;
        for p in &self.context.pseudo_refs {
            if !excluded && p == text {
                excluded = true;
                continue;
            }
            out.push(p);
        }
        out
    }

    fn score_items(&self, scorer: &dyn SegmentScorer, items: &[ScoreItem<'_>]) -> std::result::Result<Vec<f64>, ScorerError> {
        if self.parallel && scorer.is_local() && items.len() > 1 {
            let chunk = items.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
            let parts: Vec<std::result::Result<Vec<f64>, ScorerError>> =
                items.par_chunks(chunk).map(|c| score_checked(scorer, c)).collect();
            let mut out = Vec::with_capacity(items.len());
            for p in parts {
                out.extend(p?);
            }
            Ok(out)
        } else {
            score_checked(scorer, items)
        }
    }

    /// Per-component raw scores of each text, in spec order.
    pub fn component_scores<S: AsRef<str>>(&mut self, texts: &[S]) -> Result<Vec<Vec<f64>>> {
        let normalized: Vec<String> = texts.iter().map(|t| normalize(t.as_ref())).collect();
        let mut pending: Vec<&str> = Vec::new();
        for t in &normalized {
            if !self.cache.contains_key(t) && !pending.contains(&t.as_str()) {
                pending.push(t);
            }
        }
        if !pending.is_empty() {
            let mut fresh: Vec<Vec<f64>> = vec![Vec::with_capacity(self.scorers.len()); pending.len()];
            for (ci, comp) in self.spec.components.iter().enumerate() {
                let src = Some(self.context.source.as_str());
                let mut items: Vec<ScoreItem<'_>> = Vec::new();
                let mut spans: Vec<(usize, usize)> = Vec::with_capacity(pending.len());
                for &text in &pending {
                    let start = items.len();
                    match comp.mode {
                        ScoreMode::ReferenceBased => {
                            for r in &self.context.references {
                                items.push(ScoreItem { hyp: text, src, reference: Some(r) });
                            }
                        }
                        ScoreMode::SourceBased => items.push(ScoreItem { hyp: text, src, reference: None }),
                        ScoreMode::MbrPseudoRefs => {
                            let refs = self.pseudo_refs_for(text);
                            if refs.is_empty() {
                                return Err(GaError::TooFewPseudoReferences(comp.metric.clone()));
                            }
                            for r in refs {
                                items.push(ScoreItem { hyp: text, src, reference: Some(r) });
                            }
                        }
                    }
                    spans.push((start, items.len()));
                }
                let scores = self
                    .score_items(self.scorers[ci].as_ref(), &items)
                    .map_err(|source| GaError::Scorer {
                        component: comp.metric.clone(),
                        source,
                    })?;
                for (k, &(a, b)) in spans.iter().enumerate() {
                    let mut acc = 0.0;
                    for s in &scores[a..b] {
                        acc += s;
                    }
                    fresh[k].push(acc / (b - a) as f64);
                }
            }
            self.scored += pending.len();
            let keys: Vec<String> = pending.iter().map(|s| (*s).to_owned()).collect();
            for (k, v) in keys.into_iter().zip(fresh) {
                self.cache.insert(k, v);
            }
        }
        Ok(normalized.iter().map(|t| self.cache[t].clone()).collect())
    }

    pub fn fitness_of<S: AsRef<str>>(&mut self, texts: &[S]) -> Result<Vec<f64>> {
        let scores = self.component_scores(texts)?;
        Ok(scores.iter().map(|s| self.combine(s)).collect())
    }

    /// Fills in the fitness of every member.
    pub fn evaluate(&mut self, population: &mut [Candidate]) -> Result<()> {
        let texts: Vec<String> = population.iter().map(Candidate::text).collect();
        let fitness = self.fitness_of(&texts)?;
        for (c, f) in population.iter_mut().zip(fitness) {
            c.set_fitness(f);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::FnScorer;

    fn ctx(reference: &str) -> FitnessContext {
        FitnessContext::new("src", &[reference], &[reference])
    }

    #[test]
    fn single_bleu_identity() {
        let reg = ScorerRegistry::with_builtins();
        let mut ev = FitnessEvaluator::new(FitnessSpec::single("bleu", ScoreMode::ReferenceBased), &reg, ctx("the cat sat")).unwrap();
        assert_eq!(ev.fitness_of(&["the cat sat"]).unwrap(), vec![1.0]);
    }

    #[test]
    fn weighted_sum_of_components() {
        let reg = ScorerRegistry::with_builtins();
        let spec = FitnessSpec::new(vec![
            FitnessComponent::new("bleu", 1.0, ScoreMode::ReferenceBased),
            FitnessComponent::new("chrf", 1.0, ScoreMode::ReferenceBased),
        ]);
        let mut ev = FitnessEvaluator::new(spec, &reg, ctx("the cat sat")).unwrap();
        assert_eq!(ev.fitness_of(&["the cat sat"]).unwrap(), vec![2.0]);
    }

    #[test]
    fn mbr_component_excludes_self_once() {
        let reg = ScorerRegistry::with_builtins();
        let context = FitnessContext::new("src", &[] as &[&str], &["a", "a", "b"]);
        let mut ev = FitnessEvaluator::new(FitnessSpec::single("exact", ScoreMode::MbrPseudoRefs), &reg, context).unwrap();
        assert_eq!(ev.fitness_of(&["a", "b", "c"]).unwrap(), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn mbr_pool_of_self_only_fails() {
        let reg = ScorerRegistry::with_builtins();
        let context = FitnessContext::new("src", &[] as &[&str], &["a"]);
        let mut ev = FitnessEvaluator::new(FitnessSpec::single("exact", ScoreMode::MbrPseudoRefs), &reg, context).unwrap();
        assert!(matches!(ev.fitness_of(&["a"]), Err(GaError::TooFewPseudoReferences(_))));
        assert_eq!(ev.fitness_of(&["b"]).unwrap(), vec![0.0]);
    }

    #[test]
    fn negative_weight_and_mixed_modes() {
        let mut reg = ScorerRegistry::with_builtins();
        reg.register("srclen", Arc::new(FnScorer::new(|i: &ScoreItem<'_>| i.src.unwrap().len() as f64)));
        let spec = FitnessSpec::new(vec![
            FitnessComponent::new("overlap", 1.0, ScoreMode::ReferenceBased),
            FitnessComponent::new("length_ratio", -0.1, ScoreMode::ReferenceBased),
            FitnessComponent::new("srclen", 0.5, ScoreMode::SourceBased),
        ]);
        assert!(spec.has_negative_weight());
        assert_eq!(spec.optimized(), vec![0, 2]);
        assert_eq!(spec.adversarial(), vec![1]);
        let mut ev = FitnessEvaluator::new(spec, &reg, ctx("a b")).unwrap();
        let f = ev.fitness_of(&["a b c d"]).unwrap()[0];
        assert!((f - (1.0 - 0.1 * 0.5 + 0.5 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        let reg = ScorerRegistry::with_builtins();
        assert!(matches!(
            FitnessEvaluator::new(FitnessSpec::single("comet", ScoreMode::SourceBased), &reg, ctx("x")),
            Err(GaError::Scorer { source: ScorerError::Unavailable(_), .. })
        ));
        let no_ref = FitnessContext::new("src", &[] as &[&str], &["x"]);
        assert!(matches!(
            FitnessEvaluator::new(FitnessSpec::single("bleu", ScoreMode::ReferenceBased), &reg, no_ref),
            Err(GaError::MissingReference(_))
        ));
        assert!(matches!(
            FitnessEvaluator::new(FitnessSpec::new(vec![]), &reg, ctx("x")),
            Err(GaError::InvalidSpec(_))
        ));
        assert!(matches!(
            FitnessEvaluator::new(
                FitnessSpec::new(vec![FitnessComponent::new("bleu", f64::NAN, ScoreMode::ReferenceBased)]),
                &reg,
                ctx("x")
            ),
            Err(GaError::InvalidSpec(_))
        ));
    }

    #[test]
    fn cache_avoids_rescoring() {
        let reg = ScorerRegistry::with_builtins();
        let mut ev = FitnessEvaluator::new(FitnessSpec::single("chrf", ScoreMode::ReferenceBased), &reg, ctx("a b")).unwrap();
        ev.fitness_of(&["a b", "a  b", "c"]).unwrap();
        assert_eq!(ev.scored_count(), 2);
        ev.fitness_of(&["c", "d"]).unwrap();
        assert_eq!(ev.scored_count(), 3);
    }

    #[test]
    fn parallel_scoring_is_identical() {
        let reg = ScorerRegistry::with_builtins();
        let texts: Vec<String> = (0..40).map(|i| format!("w{} a b w{}", i % 7, i)).collect();
        let spec = FitnessSpec::new(vec![
            FitnessComponent::new("chrf", 0.7, ScoreMode::ReferenceBased),
            FitnessComponent::new("bleu", 0.3, ScoreMode::MbrPseudoRefs),
        ]);
        let context = FitnessContext::new("s", &["a b w3"], &texts[..10]);
        let mut seq = FitnessEvaluator::new(spec.clone(), &reg, context.clone()).unwrap();
        let mut par = FitnessEvaluator::new(spec, &reg, context).unwrap().with_parallel(true);
        assert_eq!(seq.fitness_of(&texts).unwrap(), par.fitness_of(&texts).unwrap());
    }
}
