//! Genetic-algorithm decoding over translation candidate pools.
//!
//! One run evaluates the population with a weighted multi-metric fitness,
//! then repeatedly selects parents by tournament, recombines them by
//! single-point word crossover, mutates them with words drawn from the
//! mutation pools and re-evaluates. A best-ever archive guarantees the
//! returned candidate is at least as fit as the best initial one.
//!
//! Every stochastic choice comes from one `ChaCha8Rng` seeded from
//! [`GaConfig::seed`], drawn in this order per offspring pair: two
//! tournaments (each `k` member indices), the crossover coin, the crossover
//! index, then for each child the mutation coin, operation, position, pool
//! and token.

mod candidate;
mod config;
mod engine;
mod fitness;
mod operators;
mod robustness;

use thiserror::Error;

use crate::scoring::ScorerError;

pub use candidate::{Candidate, Provenance};
pub use config::{GaConfig, MutationPools, PoolWeights, ResolvedPools};
pub use engine::{init_population, run_ga, GaOutcome, GaTrace, GenerationStats};
pub use fitness::{FitnessComponent, FitnessContext, FitnessEvaluator, FitnessSpec, ScoreMode};
pub use operators::{
    apply_mutation, crossover, crossover_at, draw_from_pool, mutate, mutate_resolved, tournament_select, MutationOp,
    PoolChoice,
};
pub use robustness::{
    compare_to_baseline, compare_to_baselines, robustness_report, BaselineComparison, ExampleOutcome,
    RobustnessConfig, RobustnessReport, Tally,
};

#[derive(Debug, Error)]
pub enum GaError {
    #[error("no candidates or pool words available")]
    EmptyPool,
    #[error("candidate has no tokens")]
    EmptyCandidate,
    #[error("population member {0} has no fitness")]
    UnevaluatedFitness(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid fitness specification: {0}")]
    InvalidSpec(String),
    #[error("component '{0}' needs a reference translation but none was given")]
    MissingReference(String),
    #[error("component '{0}' has no pseudo-references left after excluding the candidate")]
    TooFewPseudoReferences(String),
    #[error("component '{component}': {source}")]
    Scorer {
        component: String,
        #[source]
        source: ScorerError,
    },
    #[error("generation {generation}: {source}")]
    Generation {
        generation: usize,
        #[source]
        source: Box<GaError>,
    },
    #[error("score lists differ in length: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T, E = GaError> = std::result::Result<T, E>;
