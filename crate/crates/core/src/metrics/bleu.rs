use super::ngram::NGramProfile;
use super::{MetricError, PairwiseMetric, Result};

pub const DEFAULT_BLEU_ORDER: usize = 4;
const MAX_BLEU_ORDER: usize = 9;

/// Sentence BLEU over whitespace tokens.
///
/// Geometric mean of clipped n-gram precisions for orders `1..=max_order`,
/// with add-one smoothing on orders whose clipped count is zero, times the
/// brevity penalty against the closest reference length (shorter wins ties).
pub fn sentence_bleu<S: AsRef<str>>(hypothesis: &str, references: &[S], max_order: usize) -> Result<f64> {
    if !(1..=MAX_BLEU_ORDER).contains(&max_order) {
        return Err(MetricError::InvalidOrder(max_order));
    }
    let hyp: Vec<&str> = hypothesis.split_whitespace().collect();
    if hyp.is_empty() {
        return Err(MetricError::EmptyInput("hypothesis"));
    }
    let refs: Vec<Vec<&str>> = references
        .iter()
        .map(|r| r.as_ref().split_whitespace().collect::<Vec<_>>())
        .filter(|r| !r.is_empty())
        .collect();
    if refs.is_empty() {
        return Err(MetricError::EmptyInput("references"));
    }

    let mut log_sum = 0.0;
    for n in 1..=max_order {
        let hp = NGramProfile::from_items(&hyp, n);
        let mut merged = NGramProfile::from_items(&refs[0], n);
        for r in &refs[1..] {
            merged.max_merge(&NGramProfile::from_items(r, n));
        }
        let clipped = hp.matches(&merged);
        let total = hp.total();
        let p = if clipped == 0 {
            1.0 / (total as f64 + 1.0)
        } else {
            clipped as f64 / total as f64
        };
        log_sum += p.ln();
    }

    let h = hyp.len();
    let closest = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(h), r))
        .expect("at least one reference");
    let bp = (1.0 - closest as f64 / h as f64).min(0.0).exp();
    Ok(bp * (log_sum / max_order as f64).exp())
}

#[derive(Debug, Clone, Copy)]
pub struct Bleu {
    pub max_order: usize,
}

impl Default for Bleu {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_BLEU_ORDER,
        }
    }
}

impl PairwiseMetric for Bleu {
    fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        sentence_bleu(hypothesis, &[reference], self.max_order)
    }
}
