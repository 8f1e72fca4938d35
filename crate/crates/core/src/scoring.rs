//! Segment scorers: the uniform interface GA fitness components use, whether
//! the metric is built in or lives in an external process.

use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::sync::Arc;

use thiserror::Error;

use crate::metrics::{Bleu, Chrf, ExactMatch, LengthRatio, MetricError, PairwiseMetric, TokenOverlap};

/// One hypothesis to score, with optional source and reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreItem<'a> {
    pub hyp: &'a str,
    pub src: Option<&'a str>,
    pub reference: Option<&'a str>,
}

impl<'a> ScoreItem<'a> {
    pub fn new(hyp: &'a str) -> Self {
        Self {
            hyp,
            src: None,
            reference: None,
        }
    }

    pub fn with_reference(mut self, reference: &'a str) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_source(mut self, src: &'a str) -> Self {
        self.src = Some(src);
        self
    }
}

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("no scorer registered under '{0}'")]
    Unavailable(String),
    #[error("item {index} lacks a reference")]
    MissingReference { index: usize },
    #[error("item {index} lacks a source")]
    MissingSource { index: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("scorer returned {got} scores for {expected} items")]
    CountMismatch { expected: usize, got: usize },
    #[error("scorer returned a non-finite score for item {0}")]
    NonFinite(usize),
    #[error(transparent)]
    External(Box<dyn StdError + Send + Sync>),
}

impl ScorerError {
    pub fn external<E: StdError + Send + Sync + 'static>(err: E) -> Self {
        ScorerError::External(Box::new(err))
    }
}

pub trait SegmentScorer: Send + Sync {
    fn needs_source(&self) -> bool {
        false
    }

    fn needs_reference(&self) -> bool {
        true
    }

    /// Whether single items may be scored from several threads at once.
    /// External process scorers answer `false`.
    fn is_local(&self) -> bool {
        false
    }

    fn score_batch(&self, items: &[ScoreItem<'_>]) -> Result<Vec<f64>, ScorerError>;
}

/// Scores with count and finiteness checked.
pub fn score_checked(scorer: &dyn SegmentScorer, items: &[ScoreItem<'_>]) -> Result<Vec<f64>, ScorerError> {
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let scores = scorer.score_batch(items)?;
    if scores.len() != items.len() {
        return Err(ScorerError::CountMismatch {
            expected: items.len(),
            got: scores.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(ScorerError::NonFinite(i));
    }
    Ok(scores)
}

/// Adapts a [`PairwiseMetric`]. Items without a reference are scored
/// against their source.
pub struct PairwiseScorer<M> {
    metric: M,
}

impl<M: PairwiseMetric + Send> PairwiseScorer<M> {
    pub fn new(metric: M) -> Self {
        Self { metric }
    }
}

impl<M: PairwiseMetric + Send> SegmentScorer for PairwiseScorer<M> {
    fn is_local(&self) -> bool {
        true
    }

    fn score_batch(&self, items: &[ScoreItem<'_>]) -> Result<Vec<f64>, ScorerError> {
        items
            .iter()
            .enumerate()
            .map(|(index, item)| {
                let reference = item
                    .reference
                    .or(item.src)
                    .ok_or(ScorerError::MissingReference { index })?;
                Ok(self.metric.score(item.hyp, reference)?)
            })
            .collect()
    }
}

/// Closure scorer, mostly for toy fitness functions.
pub struct FnScorer<F> {
    f: F,
}

impl<F> FnScorer<F>
where
    F: Fn(&ScoreItem<'_>) -> f64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F> SegmentScorer for FnScorer<F>
where
    F: Fn(&ScoreItem<'_>) -> f64 + Send + Sync,
{
    fn needs_reference(&self) -> bool {
        false
    }

    fn is_local(&self) -> bool {
        true
    }

    fn score_batch(&self, items: &[ScoreItem<'_>]) -> Result<Vec<f64>, ScorerError> {
        Ok(items.iter().map(|i| (self.f)(i)).collect())
    }
}

/// Names of the built-in metrics registered by [`ScorerRegistry::with_builtins`].
pub const BUILTIN_METRICS: [&str; 5] = ["bleu", "chrf", "exact", "overlap", "length_ratio"];

/// Metric id to scorer.
#[derive(Clone, Default)]
pub struct ScorerRegistry {
    scorers: BTreeMap<String, Arc<dyn SegmentScorer>>,
}

impl ScorerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register("bleu", Arc::new(PairwiseScorer::new(Bleu::default())));
        r.register("chrf", Arc::new(PairwiseScorer::new(Chrf::default())));
        r.register("exact", Arc::new(PairwiseScorer::new(ExactMatch)));
        r.register("overlap", Arc::new(PairwiseScorer::new(TokenOverlap)));
        r.register("length_ratio", Arc::new(PairwiseScorer::new(LengthRatio)));
        r
    }

    /// Registers (or replaces) a scorer.
    pub fn register(&mut self, id: impl Into<String>, scorer: Arc<dyn SegmentScorer>) {
        self.scorers.insert(id.into(), scorer);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn SegmentScorer>, ScorerError> {
        self.scorers
            .get(id)
            .cloned()
            .ok_or_else(|| ScorerError::Unavailable(id.to_owned()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.scorers.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.scorers.keys().map(String::as_str)
    }
}

impl std::fmt::Debug for ScorerRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.scorers.keys()).finish()
    }
}
