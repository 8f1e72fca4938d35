use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{GaConfig, MutationPools};
use super::fitness::FitnessEvaluator;
use super::operators::{crossover, mutate_resolved, tournament_select};
use super::{Candidate, GaError, Result};

/// Builds a population of exactly `population_size` candidates: the initials
/// in order, topped up by sampling initials with replacement.
pub fn init_population<S: AsRef<str>, R: Rng + ?Sized>(
    initials: &[S],
    config: &GaConfig,
    rng: &mut R,
) -> Result<Vec<Candidate>> {
    if initials.is_empty() {
        return Err(GaError::EmptyPool);
    }
    let parsed: Vec<Candidate> = initials
        .iter()
        .map(|s| Candidate::new(s.as_ref()))
        .collect::<Result<_>>()?;
    let mut pop: Vec<Candidate> = parsed.iter().take(config.population_size).cloned().collect();
    while pop.len() < config.population_size {
        pop.push(parsed[rng.gen_range(0..parsed.len())].clone());
    }
    Ok(pop)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
    pub best_ever_text: String,
}

/// Per-generation statistics; entry 0 is the evaluated initial population.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaTrace {
    pub generations: Vec<GenerationStats>,
}

impl GaTrace {
    pub fn initial_best(&self) -> Option<f64> {
        self.generations.first().map(|g| g.best)
    }

    pub fn final_best_ever(&self) -> Option<f64> {
        self.generations.last().map(|g| g.best_ever)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Candidate,
    pub trace: GaTrace,
}

/// Fittest member; ties go to the lowest index.
fn best_index(pop: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in pop.iter().enumerate() {
        if c.fitness().unwrap() > pop[best].fitness().unwrap() {
            best = i;
        }
    }
    best
}

fn stats(generation: usize, pop: &[Candidate], archive: &Candidate) -> GenerationStats {
    let mut sum = 0.0;
    for c in pop {
        sum += c.fitness().unwrap();
    }
    GenerationStats {
        generation,
        best: pop[best_index(pop)].fitness().unwrap(),
        mean: sum / pop.len() as f64,
        best_ever: archive.fitness().unwrap(),
        best_ever_text: archive.text(),
    }
}

fn at_generation(generation: usize) -> impl FnOnce(GaError) -> GaError {
    move |e| GaError::Generation {
        generation,
        source: Box::new(e),
    }
}

/// Runs the evolutionary loop and returns the best candidate ever seen.
pub fn run_ga<S: AsRef<str>>(
    initials: &[S],
    evaluator: &mut FitnessEvaluator,
    pools: &MutationPools,
    config: &GaConfig,
) -> Result<GaOutcome> {
    config.validate()?;
    let resolved = pools.resolve(&evaluator.context().source);
    if config.mutation_rate > 0.0 && resolved.is_empty() {
        return Err(GaError::InvalidConfig(
            "mutation rate is positive but every mutation pool is empty".into(),
        ));
    }
    let evolving = evaluator.context().evolving_pool;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut pop = init_population(initials, config, &mut rng)?;
    if evolving {
        let texts: Vec<String> = pop.iter().map(Candidate::text).collect();
        evaluator.set_pseudo_refs(&texts);
    }
    evaluator.evaluate(&mut pop).map_err(at_generation(0))?;
    let mut archive = pop[best_index(&pop)].clone();
    let mut trace = GaTrace {
        generations: vec![stats(0, &pop, &archive)],
    };

    let mut order: Vec<usize> = Vec::with_capacity(pop.len());
    for generation in 1..=config.generations {
        order.clear();
        order.extend(0..pop.len());
        order.sort_by(|&a, &b| pop[b].fitness().unwrap().total_cmp(&pop[a].fitness().unwrap()));

        let mut next: Vec<Candidate> = order.iter().take(config.elitism).map(|&i| pop[i].clone()).collect();
        while next.len() < config.population_size {
            let a = tournament_select(&pop, config.tournament_size, &mut rng)?;
            let b = tournament_select(&pop, config.tournament_size, &mut rng)?;
            let (c1, c2) = if rng.gen::<f64>() < config.crossover_rate {
                crossover(&pop[a], &pop[b], &mut rng)
            } else {
                (pop[a].clone(), pop[b].clone())
            };
            for child in [c1, c2] {
                let child = if rng.gen::<f64>() < config.mutation_rate {
                    mutate_resolved(&child, &resolved, &mut rng).map_err(at_generation(generation))?
                } else {
                    child
                };
                if next.len() < config.population_size {
                    next.push(child);
                }
            }
        }

        if evolving {
            let texts: Vec<String> = next.iter().map(Candidate::text).collect();
            evaluator.set_pseudo_refs(&texts);
        }
        evaluator.evaluate(&mut next).map_err(at_generation(generation))?;
        let gen_best = &next[best_index(&next)];
        if gen_best.fitness().unwrap() > archive.fitness().unwrap() {
            archive = gen_best.clone();
        }
        trace.generations.push(stats(generation, &next, &archive));
        pop = next;
    }

    Ok(GaOutcome { best: archive, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::{FitnessContext, FitnessSpec, ScoreMode};
    use crate::scoring::{FnScorer, ScoreItem, ScorerRegistry};
    use std::sync::Arc;

    fn length_registry(target: usize) -> ScorerRegistry {
        let mut reg = ScorerRegistry::new();
        reg.register(
            "len",
            Arc::new(FnScorer::new(move |i: &ScoreItem<'_>| {
                -(i.hyp.split_whitespace().count() as f64 - target as f64).abs()
            })),
        );
        reg
    }

    fn evaluator(reg: &ScorerRegistry, initials: &[&str]) -> FitnessEvaluator {
        let ctx = FitnessContext::new("source words", &[] as &[&str], initials);
        FitnessEvaluator::new(FitnessSpec::single("len", ScoreMode::SourceBased), reg, ctx).unwrap()
    }

    #[test]
    fn init_population_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = GaConfig {
            population_size: 4,
            ..Default::default()
        };
        let pop = init_population(&["a", "b", "c", "d"], &cfg, &mut rng).unwrap();
        let texts: Vec<String> = pop.iter().map(Candidate::text).collect();
        assert_eq!(texts, ["a", "b", "c", "d"]);
        assert!(pop.iter().all(|c| c.provenance() == crate::ga::Provenance::Initial));

        let cfg5 = GaConfig {
            population_size: 5,
            ..Default::default()
        };
        let pop = init_population(&["x", "y"], &cfg5, &mut rng).unwrap();
        assert_eq!(pop.len(), 5);
        assert!(pop.iter().all(|c| c.text() == "x" || c.text() == "y"));

        assert!(matches!(
            init_population(&[] as &[&str], &cfg, &mut rng),
            Err(GaError::EmptyPool)
        ));
    }

    #[test]
    fn reaches_target_length() {
        let reg = length_registry(5);
        let initials = ["a b", "c d e f g h i j"];
        let mut ev = evaluator(&reg, &initials);
        let pools = MutationPools::from_initials(&initials);
        let cfg = GaConfig {
            generations: 200,
            population_size: 20,
            seed: 7,
            ..Default::default()
        };
        let out = run_ga(&initials, &mut ev, &pools, &cfg).unwrap();
        assert_eq!(out.best.fitness(), Some(0.0));
        assert_eq!(out.best.len(), 5);
        assert_eq!(out.trace.generations.len(), 201);
    }

    #[test]
    fn no_op_evolution_returns_best_initial() {
        let reg = length_registry(3);
        let initials = ["a", "a b c d", "a b"];
        let mut ev = evaluator(&reg, &initials);
        let cfg = GaConfig {
            generations: 1,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            population_size: 3,
            ..Default::default()
        };
        let out = run_ga(&initials, &mut ev, &MutationPools::default(), &cfg).unwrap();
        // "a b c d" and "a b" tie at -1; the lower index wins.
        assert_eq!(out.best.text(), "a b c d");
        assert_eq!(out.best.fitness(), Some(-1.0));
    }

    #[test]
    fn same_seed_same_trace() {
        let reg = length_registry(6);
        let initials = ["one two", "three four five six seven eight nine"];
        let pools = MutationPools::from_initials(&initials);
        let cfg = GaConfig {
            generations: 30,
            population_size: 12,
            seed: 99,
            ..Default::default()
        };
        let a = run_ga(&initials, &mut evaluator(&reg, &initials), &pools, &cfg).unwrap();
        let b = run_ga(&initials, &mut evaluator(&reg, &initials), &pools, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_pools_with_mutation_is_rejected() {
        let reg = length_registry(2);
        let initials = ["a"];
        let mut ev = evaluator(&reg, &initials);
        let err = run_ga(&initials, &mut ev, &MutationPools::default(), &GaConfig::default()).unwrap_err();
        assert!(matches!(err, GaError::InvalidConfig(_)));
    }

    #[test]
    fn scorer_errors_carry_generation() {
        let reg = ScorerRegistry::with_builtins();
        // MBR over a single-member pool has no pseudo-reference left for it.
        let ctx = FitnessContext::new("s", &[] as &[&str], &["a b"]);
        let mut ev = FitnessEvaluator::new(FitnessSpec::single("exact", ScoreMode::MbrPseudoRefs), &reg, ctx).unwrap();
        let err = run_ga(&["a b"], &mut ev, &MutationPools::default(), &GaConfig { mutation_rate: 0.0, ..Default::default() })
            .unwrap_err();
        assert!(matches!(err, GaError::Generation { generation: 0, .. }), "{err}");
    }

    #[test]
    fn evolving_pool_variant_runs() {
        let reg = ScorerRegistry::with_builtins();
        let initials = ["a b c", "a b d", "a c d"];
        let mut ctx = FitnessContext::new("s", &[] as &[&str], &initials);
        ctx.evolving_pool = true;
        let mut ev = FitnessEvaluator::new(FitnessSpec::single("chrf", ScoreMode::MbrPseudoRefs), &reg, ctx).unwrap();
        let cfg = GaConfig {
            population_size: 6,
            generations: 5,
            ..Default::default()
        };
        let out = run_ga(&initials, &mut ev, &MutationPools::from_initials(&initials), &cfg).unwrap();
        assert_eq!(out.trace.generations.len(), 6);
    }
}
