//! Built-in sentence-level MT metrics and MBR utilities. All scores lie in
//! `[0, 1]`.

mod bleu;
mod chrf;
mod mbr;
mod ngram;

use std::collections::HashMap;

use thiserror::Error;

pub use bleu::{sentence_bleu, Bleu, DEFAULT_BLEU_ORDER};
pub use chrf::{chrf, Chrf, DEFAULT_CHRF_BETA, DEFAULT_CHRF_ORDER};
pub use mbr::{mbr_from_matrix, mbr_rerank, mbr_utility, mbr_utility_with, pairwise_matrix, MbrOptions, MbrResult};
pub use ngram::NGramProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("empty {0}")]
    EmptyInput(&'static str),
    #[error("n-gram order {0} outside the supported range")]
    InvalidOrder(usize),
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("MBR needs at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("top_n must be at least 1")]
    InvalidTopN,
    #[error("utility matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NonSquare { rows: usize, row: usize, len: usize },
    #[error("metric returned a non-finite score")]
    NonFinite,
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;

/// A metric comparing a hypothesis against a single reference.
///
/// Closures `Fn(&str, &str) -> f64` implement this directly.
pub trait PairwiseMetric: Sync {
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64>;
}

impl<F> PairwiseMetric for F
where
    F: Fn(&str, &str) -> f64 + Sync,
{
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        Ok(self(hypothesis, reference))
    }
}

fn token_counts(text: &str) -> (HashMap<&str, usize>, usize) {
    let mut counts = HashMap::new();
    let mut n = 0;
    for tok in text.split_whitespace() {
        *counts.entry(tok).or_insert(0) += 1;
        n += 1;
    }
    (counts, n)
}

/// `1.0` when the whitespace-normalized strings are equal, else `0.0`.
pub fn exact_match(hypothesis: &str, reference: &str) -> f64 {
    let same = hypothesis.split_whitespace().eq(reference.split_whitespace());
    if same {
        1.0
    } else {
        0.0
    }
}

/// Clipped unigram matches divided by the reference length.
///
/// Recall-only and therefore easy to game by padding the hypothesis with
/// reference words.
pub fn token_overlap(hypothesis: &str, reference: &str) -> Result<f64> {
    let (hyp, _) = token_counts(hypothesis);
    let (rf, ref_len) = token_counts(reference);
    if ref_len == 0 {
        return Err(MetricError::EmptyInput("reference"));
    }
    let matched: usize = rf.iter().map(|(tok, &c)| c.min(hyp.get(tok).copied().unwrap_or(0))).sum();
    Ok(matched as f64 / ref_len as f64)
}

/// `min(|h|, |r|) / max(|h|, |r|)` over whitespace tokens.
pub fn length_ratio(hypothesis: &str, reference: &str) -> Result<f64> {
    let h = hypothesis.split_whitespace().count();
    let r = reference.split_whitespace().count();
    if r == 0 {
        return Err(MetricError::EmptyInput("reference"));
    }
    Ok(h.min(r) as f64 / h.max(r) as f64)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatch;

impl PairwiseMetric for ExactMatch {
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        Ok(exact_match(hypothesis, reference))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TokenOverlap;

impl PairwiseMetric for TokenOverlap {
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        token_overlap(hypothesis, reference)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LengthRatio;

impl PairwiseMetric for LengthRatio {
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        length_ratio(hypothesis, reference)
    }
}
