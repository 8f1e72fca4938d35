use serde::{Deserialize, Serialize};

use super::{GaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Initial,
    Crossover,
    Mutation,
}

/// A translation hypothesis as whitespace-delimited words.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    tokens: Vec<String>,
    fitness: Option<f64>,
    provenance: Provenance,
}

impl Candidate {
    pub fn new(text: &str) -> Result<Self> {
        Self::from_tokens(text.split_whitespace().map(str::to_owned).collect(), Provenance::Initial)
    }

    pub fn from_tokens(tokens: Vec<String>, provenance: Provenance) -> Result<Self> {
        if tokens.is_empty() {
            return Err(GaError::EmptyCandidate);
        }
        Ok(Self {
            tokens,
            fitness: None,
            provenance,
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Words re-joined with single spaces.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn set_fitness(&mut self, fitness: f64) {
        self.fitness = Some(fitness);
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Replaces the words, dropping any cached fitness.
    pub fn set_tokens(&mut self, tokens: Vec<String>, provenance: Provenance) -> Result<()> {
        if tokens.is_empty() {
            return Err(GaError::EmptyCandidate);
        }
        self.tokens = tokens;
        self.fitness = None;
        self.provenance = provenance;
        Ok(())
    }
}
