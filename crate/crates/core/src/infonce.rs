//! InfoNCE loss with a log-bilinear critic and its analytic gradient.
//!
//! The critic scores a target `t` against a context `c` as `tᵀ W c` (the log
//! of `f_k`). The loss of one batch is
//! `-log(exp(s⁺) / Σ_{j ∈ C} exp(s_j))`, evaluated through log-sum-exp with
//! the positive included in the denominator set `C` by default.
//!
//! With `frozen_targets` set, the positive and negative representations are
//! treated as constants and receive zero gradient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{sum_ltr, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoNceError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("batch needs at least one negative")]
    NoNegatives,
    #[error("no batches given")]
    NoBatches,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T, E = InfoNceError> = std::result::Result<T, E>;

fn check_finite<T: Real>(values: &[T], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(InfoNceError::NonFinite(what))
    }
}

fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(InfoNceError::DimensionMismatch { what, expected, got })
    }
}

/// Context `c_t`, positive target `c_{t+k}` and negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch<T> {
    context: Vec<T>,
    positive: Vec<T>,
    negatives: Vec<Vec<T>>,
}

impl<T: Real> EmbeddingBatch<T> {
    pub fn new(context: Vec<T>, positive: Vec<T>, negatives: Vec<Vec<T>>) -> Result<Self> {
        let d = context.len();
        check_dim("positive", d, positive.len())?;
        if negatives.is_empty() {
            return Err(InfoNceError::NoNegatives);
        }
        for n in &negatives {
            check_dim("negative", d, n.len())?;
            check_finite(n, "negative")?;
        }
        check_finite(&context, "context")?;
        check_finite(&positive, "positive")?;
        Ok(Self {
            context,
            positive,
            negatives,
        })
    }

    pub fn dim(&self) -> usize {
        self.context.len()
    }

    pub fn context(&self) -> &[T] {
        &self.context
    }

    pub fn positive(&self) -> &[T] {
        &self.positive
    }

    pub fn negatives(&self) -> &[Vec<T>] {
        &self.negatives
    }

    pub fn context_mut(&mut self) -> &mut [T] {
        &mut self.context
    }

    pub fn positive_mut(&mut self) -> &mut [T] {
        &mut self.positive
    }

    pub fn negative_mut(&mut self, index: usize) -> &mut [T] {
        &mut self.negatives[index]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Positive plus negatives (standard InfoNCE).
    #[default]
    IncludePositive,
    /// Negatives only, for ablations. The loss may then be negative.
    NegativesOnly,
}

/// Critic matrix `W_k` (row-major `d × d`) and gradient options.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearParams<T> {
    dim: usize,
    weights: Vec<T>,
    pub frozen_targets: bool,
    pub denominator: Denominator,
}

impl<T: Real> BilinearParams<T> {
    pub fn new(dim: usize, weights: Vec<T>) -> Result<Self> {
        check_dim("weight matrix", dim * dim, weights.len())?;
        check_finite(&weights, "weight matrix")?;
        Ok(Self {
            dim,
            weights,
            frozen_targets: false,
            denominator: Denominator::IncludePositive,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            check_dim("weight row", d, r.len())?;
        }
        Self::new(d, rows.iter().flatten().copied().collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut w = vec![T::zero(); dim * dim];
        for i in 0..dim {
            w[i * dim + i] = T::one();
        }
        Self::new(dim, w).expect("square identity")
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(dim, vec![T::zero(); dim * dim]).expect("square zeros")
    }

    pub fn frozen(mut self, frozen: bool) -> Self {
        self.frozen_targets = frozen;
        self
    }

    pub fn with_denominator(mut self, denominator: Denominator) -> Self {
        self.denominator = denominator;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.weights[row * self.dim + col]
    }

    /// `W c`.
    fn apply(&self, context: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| sum_ltr((0..self.dim).map(|j| self.get(i, j) * context[j])))
            .collect()
    }

    /// `Wᵀ u`.
    fn apply_transposed(&self, u: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|j| sum_ltr((0..self.dim).map(|i| self.get(i, j) * u[i])))
            .collect()
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    sum_ltr(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// `targetᵀ · W · context`.
pub fn critic_score<T: Real>(target: &[T], context: &[T], params: &BilinearParams<T>) -> Result<T> {
    check_dim("target", params.dim, target.len())?;
    check_dim("context", params.dim, context.len())?;
    Ok(dot(target, &params.apply(context)))
}

fn check_batch<T: Real>(batch: &EmbeddingBatch<T>, params: &BilinearParams<T>) -> Result<()> {
    check_dim("batch", params.dim, batch.dim())
}

/// Scores of the positive and each negative against the context.
fn scores<T: Real>(batch: &EmbeddingBatch<T>, params: &BilinearParams<T>) -> (Vec<T>, T, Vec<T>) {
    let wc = params.apply(&batch.context);
    let pos = dot(&batch.positive, &wc);
    let neg = batch.negatives.iter().map(|n| dot(n, &wc)).collect();
    (wc, pos, neg)
}

/// Returns `(max, Σ exp(x - max))`.
fn shifted_sum<T: Real>(values: &[T]) -> (T, T) {
    let m = values.iter().copied().fold(T::neg_infinity(), T::max);
    (m, sum_ltr(values.iter().map(|&x| (x - m).exp())))
}

fn denominator_set<T: Real>(pos: T, neg: &[T], mode: Denominator) -> Vec<T> {
    match mode {
        Denominator::IncludePositive => std::iter::once(pos).chain(neg.iter().copied()).collect(),
        Denominator::NegativesOnly => neg.to_vec(),
    }
}

fn loss_from_scores<T: Real>(pos: T, neg: &[T], mode: Denominator) -> T {
    let set = denominator_set(pos, neg, mode);
    let (m, s) = shifted_sum(&set);
    if mode == Denominator::IncludePositive && pos == m {
        // s = 1 + rest; keep precision when the positive dominates.
        let rest = sum_ltr(neg.iter().map(|&x| (x - m).exp()));
        if rest < T::lit(1e-3) {
            return rest.ln_1p();
        }
    }
    (m - pos) + s.ln()
}

pub fn infonce_loss<T: Real>(batch: &EmbeddingBatch<T>, params: &BilinearParams<T>) -> Result<T> {
    check_batch(batch, params)?;
    let (_, pos, neg) = scores(batch, params);
    Ok(loss_from_scores(pos, &neg, params.denominator))
}

/// Mean loss over batches (the expectation over `C`).
pub fn infonce_loss_mean<T: Real>(batches: &[EmbeddingBatch<T>], params: &BilinearParams<T>) -> Result<T> {
    if batches.is_empty() {
        return Err(InfoNceError::NoBatches);
    }
    let losses = batches
        .iter()
        .map(|b| infonce_loss(b, params))
        .collect::<Result<Vec<T>>>()?;
    Ok(sum_ltr(losses) / T::from_len(batches.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoNceGrad<T> {
    pub loss: T,
    /// Row-major, same layout as [`BilinearParams::weights`].
    pub weights: Vec<T>,
    pub context: Vec<T>,
    pub positive: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

pub fn infonce_grad<T: Real>(batch: &EmbeddingBatch<T>, params: &BilinearParams<T>) -> Result<InfoNceGrad<T>> {
    check_batch(batch, params)?;
    let d = params.dim;
    let (wc, pos, neg) = scores(batch, params);
    let loss = loss_from_scores(pos, &neg, params.denominator);

    // dL/ds for the positive and for each negative.
    let (g_pos, g_neg): (T, Vec<T>) = match params.denominator {
        Denominator::IncludePositive => {
            let set = denominator_set(pos, &neg, params.denominator);
            let (m, s) = shifted_sum(&set);
            let q: Vec<T> = set.iter().map(|&x| (x - m).exp() / s).collect();
            (q[0] - T::one(), q[1..].to_vec())
        }
        Denominator::NegativesOnly => {
            let (m, s) = shifted_sum(&neg);
            (-T::one(), neg.iter().map(|&x| (x - m).exp() / s).collect())
        }
    };

    // u = Σ_i g_i t_i
    let u: Vec<T> = (0..d)
        .map(|a| {
            let mut acc = g_pos * batch.positive[a];
            for (g, n) in g_neg.iter().zip(&batch.negatives) {
                acc = acc + *g * n[a];
            }
            acc
        })
        .collect();

    let mut weights = vec![T::zero(); d * d];
    for a in 0..d {
        for b in 0..d {
            weights[a * d + b] = u[a] * batch.context[b];
        }
    }
    let context = params.apply_transposed(&u);
    let (positive, negatives) = if params.frozen_targets {
        (vec![T::zero(); d], vec![vec![T::zero(); d]; batch.negatives.len()])
    } else {
        (
            wc.iter().map(|&x| g_pos * x).collect(),
            g_neg.iter().map(|&g| wc.iter().map(|&x| g * x).collect()).collect(),
        )
    };
    Ok(InfoNceGrad {
        loss,
        weights,
        context,
        positive,
        negatives,
    })
}

/// Central finite-difference gradient check used by the CLI report.
pub mod gradcheck {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    pub struct GradCheck<T> {
        pub loss: T,
        /// Largest `‖analytic − numeric‖∞ / max(‖analytic‖∞, ‖numeric‖∞)`
        /// over the gradient blocks.
        pub max_relative_error: T,
        pub passed: bool,
    }

    fn rel_error<T: Real>(analytic: &[T], numeric: &[T]) -> T {
        let inf = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let diff: Vec<T> = analytic.iter().zip(numeric).map(|(&a, &n)| a - n).collect();
        let scale = inf(analytic).max(inf(numeric));
        if scale == T::zero() {
            T::zero()
        } else {
            inf(&diff) / scale
        }
    }

    fn numeric<T: Real, F>(len: usize, h: T, mut perturbed_loss: F) -> Result<Vec<T>>
    where
        F: FnMut(usize, T) -> Result<T>,
    {
        let two = T::lit(2.0);
        (0..len)
            .map(|i| Ok((perturbed_loss(i, h)? - perturbed_loss(i, -h)?) / (two * h)))
            .collect()
    }

    pub fn check<T: Real>(batch: &EmbeddingBatch<T>, params: &BilinearParams<T>, h: T, tolerance: T) -> Result<GradCheck<T>> {
        let grad = infonce_grad(batch, params)?;
        let d = params.dim();

        let num_w = numeric(d * d, h, |i, dh| {
            let mut p = params.clone();
            p.weights_mut()[i] = p.weights_mut()[i] + dh;
            infonce_loss(batch, &p)
        })?;
        let num_c = numeric(d, h, |i, dh| {
            let mut b = batch.clone();
            b.context_mut()[i] = b.context_mut()[i] + dh;
            infonce_loss(&b, params)
        })?;
        let mut errors = vec![rel_error(&grad.weights, &num_w), rel_error(&grad.context, &num_c)];
        if !params.frozen_targets {
            let num_p = numeric(d, h, |i, dh| {
                let mut b = batch.clone();
                b.positive_mut()[i] = b.positive_mut()[i] + dh;
                infonce_loss(&b, params)
            })?;
            errors.push(rel_error(&grad.positive, &num_p));
            for (j, g) in grad.negatives.iter().enumerate() {
                let num_n = numeric(d, h, |i, dh| {
                    let mut b = batch.clone();
                    b.negative_mut(j)[i] = b.negative_mut(j)[i] + dh;
                    infonce_loss(&b, params)
                })?;
                errors.push(rel_error(g, &num_n));
            }
        }
        let max_relative_error = errors.into_iter().fold(T::zero(), T::max);
        Ok(GradCheck {
            loss: grad.loss,
            max_relative_error,
            passed: max_relative_error <= tolerance,
        })
    }
}
