use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub seed: u64,
    pub elitism: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: 0.3,
            tournament_size: 4,
            seed: 0,
            elitism: 2,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GaError::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad(format!("population size {} < 2", self.population_size));
        }
        if self.generations < 1 {
            return bad("generations must be at least 1".into());
        }
        for (name, rate) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} rate {rate} outside [0, 1]"));
            }
        }
        if self.tournament_size < 2 {
            return bad(format!("tournament size {} < 2", self.tournament_size));
        }
        if self.elitism > self.population_size {
            return bad(format!(
                "elitism {} exceeds population size {}",
                self.elitism, self.population_size
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoolWeights {
    pub initial: f64,
    pub dictionary: f64,
    pub wordlist: f64,
}

impl Default for PoolWeights {
    fn default() -> Self {
        Self {
            initial: 1.0,
            dictionary: 1.0,
            wordlist: 1.0,
        }
    }
}

/// Where inserted and replacement words come from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MutationPools {
    pub initial_words: BTreeSet<String>,
    /// Source word to candidate target words.
    pub dictionary: BTreeMap<String, Vec<String>>,
    pub wordlist: BTreeSet<String>,
    pub weights: PoolWeights,
}

impl MutationPools {
    /// Pools seeded with the words of the initial candidates.
    pub fn from_initials<S: AsRef<str>>(initials: &[S]) -> Self {
        Self {
            initial_words: initials
                .iter()
                .flat_map(|s| s.as_ref().split_whitespace().map(str::to_owned))
                .collect(),
            ..Self::default()
        }
    }

    /// Fixes the pools for one source sentence: only dictionary entries whose
    /// key occurs in the source contribute target words.
    pub fn resolve(&self, source: &str) -> ResolvedPools {
        let src: BTreeSet<&str> = source.split_whitespace().collect();
        let dict: BTreeSet<String> = self
            .dictionary
            .iter()
            .filter(|(k, _)| src.contains(k.as_str()))
            .flat_map(|(_, v)| v.iter().cloned())
            .collect();
        let weights = [self.weights.initial, self.weights.dictionary, self.weights.wordlist];
        let pools = [
            self.initial_words.iter().cloned().collect::<Vec<_>>(),
            dict.into_iter().collect(),
            self.wordlist.iter().cloned().collect(),
        ];
        ResolvedPools { weights, pools }
    }
}

/// Pools bound to a source sentence, in fixed order initial, dictionary,
/// wordlist. Each pool's words are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPools {
    pub(crate) weights: [f64; 3],
    pub(crate) pools: [Vec<String>; 3],
}

impl ResolvedPools {
    pub fn pool(&self, index: usize) -> &[String] {
        &self.pools[index]
    }

    /// Total weight of the non-empty pools.
    pub fn active_weight(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.pools)
            .filter(|(w, p)| **w > 0.0 && !p.is_empty())
            .map(|(w, _)| *w)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.active_weight() <= 0.0
    }
}
