//! Run configuration: a versioned JSON file whose values can be overridden
//! by `UIDLAB_*` environment variables and then by command-line flags.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uidlab_core::ga::{FitnessComponent, FitnessSpec, GaConfig, PoolWeights, RobustnessConfig, ScoreMode};
use uidlab_core::infonce::Denominator;
use uidlab_core::measures::Measure;

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// `[id=]cmd:<command>` or `[id=]http:<url>` registrations.
    #[serde(default)]
    pub scorers: Vec<String>,
    #[serde(default)]
    pub scorer_options: ScorerSection,
    #[serde(default)]
    pub measure: MeasureSection,
    #[serde(default)]
    pub correlate: CorrelateSection,
    #[serde(default)]
    pub mbr: MbrSection,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub infonce: InfoNceSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: None,
            out: None,
            scorers: Vec::new(),
            scorer_options: ScorerSection::default(),
            measure: MeasureSection::default(),
            correlate: CorrelateSection::default(),
            mbr: MbrSection::default(),
            ga: GaSection::default(),
            infonce: InfoNceSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScorerSection {
    pub timeout_secs: f64,
    pub respawn: bool,
    /// Bearer token for HTTP endpoints.
    pub http_token: Option<String>,
}

impl Default for ScorerSection {
    fn default() -> Self {
        Self {
            timeout_secs: 120.0,
            respawn: true,
            http_token: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSection {
    /// Defaults to every measure.
    pub measures: Option<Vec<Measure>>,
    pub k: f64,
    pub c: f64,
    /// Exponents for the superlinear-mean sweep CSV.
    pub k_grid: Option<Vec<f64>>,
    /// Corpus for the unigram model (surprisal JSONL or plain text).
    /// Defaults to the tokens of the input itself.
    pub unigram: Option<PathBuf>,
    pub smoothing: f64,
    /// Use one corpus mean for every group instead of a mean per group.
    pub global_mean: bool,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self {
            measures: None,
            k: 2.0,
            c: 0.0,
            k_grid: None,
            unigram: None,
            smoothing: 1.0,
            global_mean: false,
        }
    }
}

impl MeasureSection {
    pub fn selected(&self) -> Vec<Measure> {
        self.measures.clone().unwrap_or_else(|| Measure::ALL.to_vec())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelateSection {
    /// Quality-score thresholds, increasing. Defaults to eleven evenly
    /// spaced points between the lowest and highest score.
    pub thresholds: Option<Vec<f64>>,
    /// Which quality system's scores filter the sweep when the quality file
    /// holds several.
    pub quality_system: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MbrSection {
    pub metric: String,
    pub include_self: bool,
    pub top_n: Option<usize>,
    pub parallel: bool,
}

impl Default for MbrSection {
    fn default() -> Self {
        Self {
            metric: "chrf".into(),
            include_self: false,
            top_n: None,
            parallel: false,
        }
    }
}

/// The metric that judges GA output without being optimized (or while
/// being pushed down with a negative weight).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeldOutSpec {
    pub metric: String,
    pub mode: ScoreMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub search: GaConfig,
    pub fitness: Vec<FitnessComponent>,
    pub held_out: Option<HeldOutSpec>,
    /// Weight given to the held-out metric when `adversarial` adds it to
    /// the fitness.
    pub adversarial_weight: f64,
    pub margins: RobustnessConfig,
    pub dictionary: Option<PathBuf>,
    pub wordlist: Option<PathBuf>,
    pub pool_weights: PoolWeights,
    /// Run examples, and fitness evaluation of built-in metrics, in parallel.
    pub parallel: bool,
    /// Use the current population instead of the initial candidates as MBR
    /// pseudo-references.
    pub evolving_pool: bool,
}

impl Default for GaSection {
    fn default() -> Self {
        Self {
            search: GaConfig::default(),
            fitness: vec![FitnessComponent::new("chrf", 1.0, ScoreMode::MbrPseudoRefs)],
            held_out: None,
            adversarial_weight: -0.1,
            margins: RobustnessConfig::default(),
            dictionary: None,
            wordlist: None,
            pool_weights: PoolWeights::default(),
            parallel: false,
            evolving_pool: false,
        }
    }
}

impl GaSection {
    pub fn fitness_spec(&self) -> FitnessSpec {
        FitnessSpec::new(self.fitness.clone())
    }

    /// The explicit held-out metric, or else the first negative-weight
    /// fitness component.
    pub fn effective_held_out(&self) -> Option<HeldOutSpec> {
        self.held_out.clone().or_else(|| {
            self.fitness.iter().find(|c| c.weight < 0.0).map(|c| HeldOutSpec {
                metric: c.metric.clone(),
                mode: c.mode,
            })
        })
    }

    /// Adversarial mode: adds the held-out metric with the adversarial
    /// weight when no component is negative yet, then requires one.
    pub fn make_adversarial(&mut self) -> Result<(), CliError> {
        if !self.fitness.iter().any(|c| c.weight < 0.0) {
            if let Some(h) = &self.held_out {
                if self.adversarial_weight.is_nan() || self.adversarial_weight >= 0.0 {
                    return Err(CliError::config("adversarial_weight must be negative"));
                }
                self.fitness
                    .push(FitnessComponent::new(h.metric.clone(), self.adversarial_weight, h.mode));
            }
        }
        if !self.fitness_spec().has_negative_weight() {
            return Err(CliError::config(
                "adversarial mode needs a negative-weight fitness component or a held-out metric",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InfoNceSection {
    /// Finite-difference step.
    pub h: f64,
    /// Largest accepted relative gradient error.
    pub tolerance: f64,
    pub frozen_targets: bool,
    pub denominator: Denominator,
}

impl Default for InfoNceSection {
    fn default() -> Self {
        Self {
            h: 1e-5,
            tolerance: 1e-5,
            frozen_targets: false,
            denominator: Denominator::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !(self.scorer_options.timeout_secs > 0.0 && self.scorer_options.timeout_secs.is_finite()) {
            return Err(CliError::config("scorer_options.timeout_secs must be positive"));
        }
        let m = &self.measure;
        if !m.k.is_finite() || !m.c.is_finite() {
            return Err(CliError::config("measure.k and measure.c must be finite"));
        }
        if let Some(grid) = &m.k_grid {
            if grid.is_empty() || grid.iter().any(|k| !k.is_finite()) {
                return Err(CliError::config("measure.k_grid must hold finite exponents"));
            }
        }
        if !(m.smoothing > 0.0 && m.smoothing.is_finite()) {
            return Err(CliError::config("measure.smoothing must be positive"));
        }
        if let Some(t) = &self.correlate.thresholds {
            if t.is_empty() || t.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) || t.iter().any(|x| !x.is_finite()) {
                return Err(CliError::config("correlate.thresholds must be finite and strictly increasing"));
            }
        }
        if self.mbr.top_n == Some(0) {
            return Err(CliError::config("mbr.top_n must be at least 1"));
        }
        let ga = &self.ga;
        ga.search.validate().map_err(|e| CliError::config(format!("ga.search: {e}")))?;
        ga.fitness_spec()
            .validate()
            .map_err(|e| CliError::config(format!("ga.fitness: {e}")))?;
        let margins = [ga.margins.margin_optimized, ga.margins.margin_held_out];
        if margins.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(CliError::config("ga.margins must be non-negative"));
        }
        let w = ga.pool_weights;
        if [w.initial, w.dictionary, w.wordlist].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(CliError::config("ga.pool_weights must be non-negative"));
        }
        if !(self.infonce.h > 0.0 && self.infonce.tolerance > 0.0) {
            return Err(CliError::config("infonce.h and infonce.tolerance must be positive"));
        }
        Ok(())
    }
}

fn parse_mode(s: &str) -> Result<ScoreMode, String> {
    match s {
        "ref" | "reference" | "reference_based" => Ok(ScoreMode::ReferenceBased),
        "src" | "source" | "source_based" => Ok(ScoreMode::SourceBased),
        "mbr" | "mbr_pseudo_refs" => Ok(ScoreMode::MbrPseudoRefs),
        other => Err(format!("unknown score mode '{other}' (use ref, src or mbr)")),
    }
}

/// A `--fitness metric[:weight[:mode]]` flag value. Weight defaults to 1
/// and mode to `ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentArg(pub FitnessComponent);

impl FromStr for ComponentArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let metric = parts.next().filter(|m| !m.is_empty()).ok_or("empty metric id")?;
        let weight = match parts.next() {
            Some(w) => w.parse::<f64>().map_err(|e| format!("weight '{w}': {e}"))?,
            None => 1.0,
        };
        let mode = match parts.next() {
            Some(m) => parse_mode(m)?,
            None => ScoreMode::ReferenceBased,
        };
        if parts.next().is_some() {
            return Err(format!("'{s}': expected metric[:weight[:mode]]"));
        }
        Ok(ComponentArg(FitnessComponent::new(metric, weight, mode)))
    }
}

/// A `--held-out metric[:mode]` flag value. Mode defaults to `ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeldOutArg(pub HeldOutSpec);

impl FromStr for HeldOutArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (metric, mode) = match s.split_once(':') {
            Some((m, mode)) => (m, parse_mode(mode)?),
            None => (s, ScoreMode::ReferenceBased),
        };
        if metric.is_empty() {
            return Err("empty metric id".into());
        }
        Ok(HeldOutArg(HeldOutSpec {
            metric: metric.to_owned(),
            mode,
        }))
    }
}
