use super::ngram::NGramProfile;
use super::{MetricError, PairwiseMetric, Result};

pub const DEFAULT_CHRF_ORDER: usize = 6;
pub const DEFAULT_CHRF_BETA: f64 = 2.0;

/// Character n-gram F-score with whitespace removed.
///
/// Precision and recall are averaged over the orders for which both strings
/// have at least one n-gram, then combined as `F_beta`.
pub fn chrf(hypothesis: &str, reference: &str, max_order: usize, beta: f64) -> Result<f64> {
    if max_order == 0 {
        return Err(MetricError::InvalidOrder(0));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(MetricError::InvalidBeta(beta));
    }
    let hyp: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let rf: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if hyp.is_empty() {
        return Err(MetricError::EmptyInput("hypothesis"));
    }
    if rf.is_empty() {
        return Err(MetricError::EmptyInput("reference"));
    }

    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut effective = 0usize;
    for n in 1..=max_order {
        let hp = NGramProfile::from_items(&hyp, n);
        let rp = NGramProfile::from_items(&rf, n);
        if hp.total() == 0 || rp.total() == 0 {
            continue;
        }
        let m = hp.matches(&rp) as f64;
        precision += m / hp.total() as f64;
        recall += m / rp.total() as f64;
        effective += 1;
    }
    let p = precision / effective as f64;
    let r = recall / effective as f64;
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + b2) * p * r / denom)
}

#[derive(Debug, Clone, Copy)]
pub struct Chrf {
    pub max_order: usize,
    pub beta: f64,
}

impl Default for Chrf {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_CHRF_ORDER,
            beta: DEFAULT_CHRF_BETA,
        }
    }
}

impl PairwiseMetric for Chrf {
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        chrf(hypothesis, reference, self.max_order, self.beta)
    }
}
