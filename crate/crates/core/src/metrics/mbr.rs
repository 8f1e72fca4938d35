use rayon::prelude::*;

use super::{MetricError, PairwiseMetric, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MbrOptions {
    /// Count `metric(h_i, h_i)` in the expectation.
    pub include_self: bool,
    /// Fill the utility matrix row-parallel. Results are identical either way.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbrResult {
    pub utilities: Vec<f64>,
    pub winner: usize,
}

impl MbrResult {
    /// Indices sorted by utility, highest first, stable on index.
    pub fn ranking(&self) -> Vec<(usize, f64)> {
        let mut order: Vec<(usize, f64)> = self.utilities.iter().copied().enumerate().collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1));
        order
    }
}

/// `matrix[i][j] = metric(hypothesis = c_i, reference = c_j)`. The diagonal
/// is only evaluated when `include_self` is set and is `0.0` otherwise.
pub fn pairwise_matrix<S, M>(candidates: &[S], metric: &M, options: MbrOptions) -> Result<Vec<Vec<f64>>>
where
    S: AsRef<str> + Sync,
    M: PairwiseMetric + ?Sized,
{
    let row = |i: usize| -> Result<Vec<f64>> {
        (0..candidates.len())
            .map(|j| {
                if i == j && !options.include_self {
                    return Ok(0.0);
                }
                let v = metric.score(candidates[i].as_ref(), candidates[j].as_ref())?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(MetricError::NonFinite)
                }
            })
            .collect()
    };
    if options.parallel {
        (0..candidates.len()).into_par_iter().map(row).collect()
    } else {
        (0..candidates.len()).map(row).collect()
    }
}

/// Reduces a precomputed utility matrix in fixed index order.
pub fn mbr_from_matrix(matrix: &[Vec<f64>], include_self: bool) -> Result<MbrResult> {
    let n = matrix.len();
    if n < 2 {
        return Err(MetricError::TooFewCandidates(n));
    }
    if let Some((row, r)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(MetricError::NonSquare { rows: n, row, len: r.len() });
    }
    let denom = if include_self { n } else { n - 1 } as f64;
    let utilities: Vec<f64> = matrix
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut acc = 0.0;
            for (j, &v) in r.iter().enumerate() {
                if include_self || i != j {
                    acc += v;
                }
            }
            acc / denom
        })
        .collect();
    let mut winner = 0;
    for (i, &u) in utilities.iter().enumerate() {
        if u > utilities[winner] {
            winner = i;
        }
    }
    Ok(MbrResult { utilities, winner })
}

pub fn mbr_utility_with<S, M>(candidates: &[S], metric: &M, options: MbrOptions) -> Result<MbrResult>
where
    S: AsRef<str> + Sync,
    M: PairwiseMetric + ?Sized,
{
    if candidates.len() < 2 {
        return Err(MetricError::TooFewCandidates(candidates.len()));
    }
    let matrix = pairwise_matrix(candidates, metric, options)?;
    mbr_from_matrix(&matrix, options.include_self)
}

/// Expected utility of each candidate against all the others.
pub fn mbr_utility<S, M>(candidates: &[S], metric: &M) -> Result<MbrResult>
where
    S: AsRef<str> + Sync,
    M: PairwiseMetric + ?Sized,
{
    mbr_utility_with(candidates, metric, MbrOptions::default())
}

/// The `top_n` highest-utility candidates as `(index, utility)`.
pub fn mbr_rerank<S, M>(candidates: &[S], metric: &M, top_n: usize) -> Result<Vec<(usize, f64)>>
where
    S: AsRef<str> + Sync,
    M: PairwiseMetric + ?Sized,
{
    if top_n == 0 {
        return Err(MetricError::InvalidTopN);
    }
    let mut ranking = mbr_utility(candidates, metric)?.ranking();
    ranking.truncate(top_n);
    Ok(ranking)
}
