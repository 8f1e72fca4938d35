//! Sentence-level surprisal uniformity measures.
//!
//! Every measure consumes a [`SurprisalSequence`], an ordered list of tokens
//! paired with their in-context surprisal in nats. Sums accumulate left to
//! right so results do not depend on evaluation order.
//!
//! | Measure | Value |
//! |---------|-------|
//! | [`local_variance`] | mean squared step between neighbouring surprisals |
//! | [`coefficient_of_variation`] | population σ over μ |
//! | [`global_variance`] | mean squared distance from the corpus mean |
//! | [`superlinear_mean`] | mean of `s^k` |
//! | [`slor`] | mean of `s^k - s_u^k` against a unigram model |
//! | [`gini`] | mean absolute difference Gini coefficient |
//! | [`effort_uid`] | `Σ s^k + c·N` |
//! | [`effort_linear`] | `Σ s` |

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{sum_ltr, Real};

/// Default exponent for the super-linear measures.
pub const DEFAULT_K: f64 = 2.0;
/// Default add-constant smoothing for [`UnigramModel`].
pub const DEFAULT_SMOOTHING: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("sequence has no tokens")]
    EmptySequence,
    #[error("sequence has {tokens} tokens but {surprisals} surprisal values")]
    LengthMismatch { tokens: usize, surprisals: usize },
    #[error("surprisal at position {index} is not a finite non-negative number")]
    InvalidSurprisal { index: usize },
    #[error("sequence of length {len} is too short (need at least {min})")]
    SequenceTooShort { len: usize, min: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("corpus statistics are required but were not provided")]
    MissingCorpusStats,
    #[error("a unigram model is required but was not provided")]
    MissingUnigramModel,
    #[error("invalid exponent k = {k}: must be greater than {bound}")]
    InvalidExponent { k: f64, bound: f64 },
    #[error("invalid effort constant c = {0}: must be non-negative")]
    InvalidConstant(f64),
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("smoothing constant must be positive and finite, got {0}")]
    InvalidSmoothing(f64),
    #[error("result is not finite")]
    NonFinite,
    #[error("{measure}: {source}")]
    Measure {
        measure: Measure,
        #[source]
        source: Box<MeasureError>,
    },
}

pub type Result<T, E = MeasureError> = std::result::Result<T, E>;

/// Converts a surprisal in bits to nats.
pub fn bits_to_nats<T: Real>(bits: T) -> T {
    bits * T::LN_2()
}

/// Converts a surprisal in nats to bits.
pub fn nats_to_bits<T: Real>(nats: T) -> T {
    nats / T::LN_2()
}

/// Ordered tokens with their in-context surprisal values (nats).
#[derive(Debug, Clone, PartialEq)]
pub struct SurprisalSequence<T> {
    id: String,
    tokens: Vec<String>,
    surprisals: Vec<T>,
    group: Option<String>,
}

impl<T: Real> SurprisalSequence<T> {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        surprisals: Vec<T>,
        group: Option<String>,
    ) -> Result<Self> {
        if tokens.is_empty() {
            return Err(MeasureError::EmptySequence);
        }
        if tokens.len() != surprisals.len() {
            return Err(MeasureError::LengthMismatch {
                tokens: tokens.len(),
                surprisals: surprisals.len(),
            });
        }
        if let Some(index) = surprisals.iter().position(|s| !s.is_finite() || *s < T::zero()) {
            return Err(MeasureError::InvalidSurprisal { index });
        }
        Ok(Self {
            id: id.into(),
            tokens,
            surprisals,
            group,
        })
    }

    /// Builds a sequence with placeholder tokens `w0, w1, ...`.
    pub fn from_surprisals(id: impl Into<String>, surprisals: Vec<T>) -> Result<Self> {
        let tokens = (0..surprisals.len()).map(|i| format!("w{i}")).collect();
        Self::new(id, tokens, surprisals, None)
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn surprisals(&self) -> &[T] {
        &self.surprisals
    }

    pub fn group(&self) -> Option<&str> {
        self.group.as_deref()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn total(&self) -> T {
        sum_ltr(self.surprisals.iter().copied())
    }

    pub fn mean(&self) -> T {
        let mut acc = MeanAccumulator::new();
        acc.extend(self.surprisals.iter().copied());
        acc.mean().expect("sequences are non-empty")
    }

    /// Appends `other` after `self`, keeping this sequence's id and group.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.tokens.extend(other.tokens.iter().cloned());
        out.surprisals.extend(other.surprisals.iter().copied());
        out
    }
}

/// Corpus-level mean surprisal used by [`global_variance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats<T> {
    pub mean: Option<T>,
    pub token_count: usize,
}

impl<T: Real> CorpusStats<T> {
    pub fn with_mean(mean: T, token_count: usize) -> Self {
        Self {
            mean: Some(mean),
            token_count,
        }
    }

    pub fn from_sequences<'a, I>(sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a SurprisalSequence<T>>,
    {
        let mut acc = MeanAccumulator::new();
        for seq in sequences {
            acc.extend(seq.surprisals.iter().copied());
        }
        acc.corpus_stats()
    }
}

/// Streaming mean `x₀ + Σ (xᵢ − x₀) / n`, exact when all values are equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanAccumulator<T> {
    shift: Option<T>,
    offset_sum: T,
    count: usize,
}

impl<T: Real> Default for MeanAccumulator<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> MeanAccumulator<T> {
    pub fn new() -> Self {
        Self {
            shift: None,
            offset_sum: T::zero(),
            count: 0,
        }
    }

    pub fn push(&mut self, x: T) {
        let shift = *self.shift.get_or_insert(x);
        self.offset_sum = self.offset_sum + (x - shift);
        self.count += 1;
    }

    pub fn extend<I: IntoIterator<Item = T>>(&mut self, values: I) {
        for x in values {
            self.push(x);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<T> {
        self.shift.map(|s| s + self.offset_sum / T::from_len(self.count))
    }

    pub fn corpus_stats(&self) -> CorpusStats<T> {
        CorpusStats {
            mean: self.mean(),
            token_count: self.count,
        }
    }
}

/// Context-free unigram surprisal table with add-constant smoothing and one
/// reserved slot for unseen tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramModel<T> {
    counts: HashMap<String, u64>,
    total: u64,
    smoothing: T,
}

impl<T: Real> UnigramModel<T> {
    pub fn build<I, S, W>(sequences: I, smoothing: T) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        if !(smoothing.is_finite() && smoothing > T::zero()) {
            return Err(MeasureError::InvalidSmoothing(smoothing.to_f64_lossy()));
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for seq in sequences {
            for tok in seq {
                *counts.entry(tok.as_ref().to_owned()).or_insert(0) += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(MeasureError::EmptyCorpus);
        }
        Ok(Self {
            counts,
            total,
            smoothing,
        })
    }

    /// Whitespace-tokenizes each line of plain text.
    pub fn from_text_lines<I, S>(lines: I, smoothing: T) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tokenized: Vec<Vec<String>> = lines
            .into_iter()
            .map(|l| l.as_ref().split_whitespace().map(str::to_owned).collect())
            .collect();
        Self::build(tokenized, smoothing)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn smoothing(&self) -> T {
        self.smoothing
    }

    /// `-ln((count + α) / (total + α·(|V| + 1)))`.
    pub fn surprisal(&self, token: &str) -> T {
        let count = T::lit(self.count(token) as f64);
        let total = T::lit(self.total as f64);
        let slots = T::from_len(self.counts.len() + 1);
        let p = (count + self.smoothing) / (total + self.smoothing * slots);
        -p.ln()
    }
}

fn check_positive_k<T: Real>(k: T) -> Result<()> {
    if k.is_finite() && k > T::zero() {
        Ok(())
    } else {
        Err(MeasureError::InvalidExponent {
            k: k.to_f64_lossy(),
            bound: 0.0,
        })
    }
}

pub fn local_variance<T: Real>(seq: &SurprisalSequence<T>) -> Result<T> {
    let n = seq.len();
    if n < 2 {
        return Err(MeasureError::SequenceTooShort { len: n, min: 2 });
    }
    let s = seq.surprisals();
    let total = sum_ltr(s.windows(2).map(|w| {
        let d = w[1] - w[0];
        d * d
    }));
    Ok(total / T::from_len(n - 1))
}

/// Population standard deviation divided by the mean.
pub fn coefficient_of_variation<T: Real>(seq: &SurprisalSequence<T>) -> Result<T> {
    let mean = seq.mean();
    if mean == T::zero() {
        return Err(MeasureError::DegenerateInput("mean surprisal is zero"));
    }
    let var = sum_ltr(seq.surprisals().iter().map(|&s| (s - mean) * (s - mean))) / T::from_len(seq.len());
    Ok(var.sqrt() / mean)
}

pub fn global_variance<T: Real>(seq: &SurprisalSequence<T>, corpus: &CorpusStats<T>) -> Result<T> {
    let mu = corpus.mean.ok_or(MeasureError::MissingCorpusStats)?;
    let total = sum_ltr(seq.surprisals().iter().map(|&s| (s - mu) * (s - mu)));
    Ok(total / T::from_len(seq.len()))
}

pub fn superlinear_mean<T: Real>(seq: &SurprisalSequence<T>, k: T) -> Result<T> {
    check_positive_k(k)?;
    let total = sum_ltr(seq.surprisals().iter().map(|&s| s.powf(k)));
    Ok(total / T::from_len(seq.len()))
}

/// Mean per-token difference of powered contextual and unigram surprisals.
pub fn slor<T: Real>(seq: &SurprisalSequence<T>, unigram: &UnigramModel<T>, k: T) -> Result<T> {
    check_positive_k(k)?;
    let total = sum_ltr(
        seq.tokens()
            .iter()
            .zip(seq.surprisals())
            .map(|(tok, &s)| s.powf(k) - unigram.surprisal(tok).powf(k)),
    );
    Ok(total / T::from_len(seq.len()))
}

/// SLOR against explicit per-token unigram surprisals.
pub fn slor_with<T: Real>(seq: &SurprisalSequence<T>, unigram_surprisals: &[T], k: T) -> Result<T> {
    check_positive_k(k)?;
    if unigram_surprisals.len() != seq.len() {
        return Err(MeasureError::LengthMismatch {
            tokens: seq.len(),
            surprisals: unigram_surprisals.len(),
        });
    }
    let total = sum_ltr(
        seq.surprisals()
            .iter()
            .zip(unigram_surprisals)
            .map(|(&s, &u)| s.powf(k) - u.powf(k)),
    );
    Ok(total / T::from_len(seq.len()))
}

/// Gini coefficient `Σ_i Σ_j |s_i - s_j| / (2 N² μ)`, evaluated in
/// O(N log N) from the gaps between consecutive sorted values: the gap
/// above the k-th smallest value is crossed by `k (N - k)` ordered pairs.
pub fn gini<T: Real>(seq: &SurprisalSequence<T>) -> Result<T> {
    let n = seq.len();
    let mean = seq.mean();
    if mean == T::zero() {
        return Err(MeasureError::DegenerateInput("mean surprisal is zero"));
    }
    let mut sorted = seq.surprisals().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("surprisals are finite"));
    let weighted = sum_ltr(sorted.windows(2).enumerate().map(|(i, w)| {
        let k = i + 1;
        T::from_len(k * (n - k)) * (w[1] - w[0])
    }));
    let nn = T::from_len(n);
    Ok(weighted / (nn * nn * mean))
}

pub fn effort_uid<T: Real>(seq: &SurprisalSequence<T>, k: T, c: T) -> Result<T> {
    if !(k.is_finite() && k > T::one()) {
        return Err(MeasureError::InvalidExponent {
            k: k.to_f64_lossy(),
            bound: 1.0,
        });
    }
    if !(c.is_finite() && c >= T::zero()) {
        return Err(MeasureError::InvalidConstant(c.to_f64_lossy()));
    }
    let total = sum_ltr(seq.surprisals().iter().map(|&s| s.powf(k)));
    Ok(total + c * T::from_len(seq.len()))
}

pub fn effort_linear<T: Real>(seq: &SurprisalSequence<T>) -> T {
    seq.total()
}

/// Default exponent grid `0.5, 0.75, ..., 3.0`.
pub fn default_k_grid<T: Real>() -> Vec<T> {
    (0..=10).map(|i| T::lit(0.5 + 0.25 * i as f64)).collect()
}

/// Evaluates a k-dependent measure over a grid of exponents.
pub fn sweep_k<T: Real, F>(ks: &[T], mut measure: F) -> Result<Vec<(T, T)>>
where
    F: FnMut(T) -> Result<T>,
{
    ks.iter().map(|&k| measure(k).map(|v| (k, v))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Lv,
    Cv,
    Gv,
    Sl,
    Slor,
    Gini,
    EffortUid,
    EffortLinear,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::Lv,
        Measure::Cv,
        Measure::Gv,
        Measure::Sl,
        Measure::Slor,
        Measure::Gini,
        Measure::EffortUid,
        Measure::EffortLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Lv => "lv",
            Measure::Cv => "cv",
            Measure::Gv => "gv",
            Measure::Sl => "sl",
            Measure::Slor => "slor",
            Measure::Gini => "gini",
            Measure::EffortUid => "effort_uid",
            Measure::EffortLinear => "effort_linear",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown measure '{0}'")]
pub struct UnknownMeasure(pub String);

impl FromStr for Measure {
    type Err = UnknownMeasure;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| UnknownMeasure(s.to_owned()))
    }
}

/// Which measures to compute and with which parameters.
#[derive(Debug, Clone)]
pub struct ReportConfig<'a, T> {
    pub measures: Vec<Measure>,
    pub k: T,
    pub c: T,
    pub corpus: Option<CorpusStats<T>>,
    pub unigram: Option<&'a UnigramModel<T>>,
}

impl<T: Real> ReportConfig<'_, T> {
    pub fn new(measures: impl IntoIterator<Item = Measure>) -> Self {
        Self {
            measures: measures.into_iter().collect(),
            k: T::lit(DEFAULT_K),
            c: T::zero(),
            corpus: None,
            unigram: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams<T> {
    pub k: T,
    pub c: T,
    pub corpus_mean: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport<T> {
    pub id: String,
    pub group: Option<String>,
    pub values: BTreeMap<Measure, T>,
    pub params: ReportParams<T>,
}

impl<T: Real> UniformityReport<T> {
    pub fn get(&self, measure: Measure) -> Option<T> {
        self.values.get(&measure).copied()
    }
}

pub fn measure_value<T: Real>(seq: &SurprisalSequence<T>, measure: Measure, config: &ReportConfig<'_, T>) -> Result<T> {
    let value = match measure {
        Measure::Lv => local_variance(seq),
        Measure::Cv => coefficient_of_variation(seq),
        Measure::Gv => match &config.corpus {
            Some(corpus) => global_variance(seq, corpus),
            None => Err(MeasureError::MissingCorpusStats),
        },
        Measure::Sl => superlinear_mean(seq, config.k),
        Measure::Slor => match config.unigram {
            Some(unigram) => slor(seq, unigram, config.k),
            None => Err(MeasureError::MissingUnigramModel),
        },
        Measure::Gini => gini(seq),
        Measure::EffortUid => effort_uid(seq, config.k, config.c),
        Measure::EffortLinear => Ok(effort_linear(seq)),
    }?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(MeasureError::NonFinite)
    }
}

/// Computes every requested measure. The first failing measure aborts the
/// report and is named in the error.
pub fn uniformity_report<T: Real>(
    seq: &SurprisalSequence<T>,
    config: &ReportConfig<'_, T>,
) -> Result<UniformityReport<T>> {
    let mut values = BTreeMap::new();
    for &measure in &config.measures {
        if values.contains_key(&measure) {
            continue;
        }
        let v = measure_value(seq, measure, config).map_err(|e| MeasureError::Measure {
            measure,
            source: Box::new(e),
        })?;
        values.insert(measure, v);
    }
    Ok(UniformityReport {
        id: seq.id().to_owned(),
        group: seq.group().map(str::to_owned),
        values,
        params: ReportParams {
            k: config.k,
            c: config.c,
            corpus_mean: config.corpus.and_then(|c| c.mean),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seq(values: &[f64]) -> SurprisalSequence<f64> {
        SurprisalSequence::from_surprisals("s", values.to_vec()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(
            SurprisalSequence::<f64>::from_surprisals("a", vec![]),
            Err(MeasureError::EmptySequence)
        );
        assert_eq!(
            SurprisalSequence::new("a", vec!["x".into()], vec![1.0, 2.0], None),
            Err(MeasureError::LengthMismatch { tokens: 1, surprisals: 2 })
        );
        assert_eq!(
            SurprisalSequence::from_surprisals("a", vec![1.0, -0.5]),
            Err(MeasureError::InvalidSurprisal { index: 1 })
        );
        assert_eq!(
            SurprisalSequence::from_surprisals("a", vec![f64::INFINITY]),
            Err(MeasureError::InvalidSurprisal { index: 0 })
        );
    }

    #[test]
    fn local_variance_examples() {
        assert_eq!(local_variance(&seq(&[3.0, 3.0, 3.0])).unwrap(), 0.0);
        assert_eq!(local_variance(&seq(&[2.0, 4.0, 2.0])).unwrap(), 4.0);
        assert_eq!(
            local_variance(&seq(&[5.0])),
            Err(MeasureError::SequenceTooShort { len: 1, min: 2 })
        );
    }

    #[test]
    fn coefficient_of_variation_examples() {
        assert_eq!(coefficient_of_variation(&seq(&[3.0, 3.0, 3.0])).unwrap(), 0.0);
        // σ = sqrt(8/9), μ = 8/3
        let expected = (8.0f64 / 9.0).sqrt() / (8.0 / 3.0);
        assert_relative_eq!(coefficient_of_variation(&seq(&[2.0, 4.0, 2.0])).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 0.35355, epsilon = 1e-5);
        assert!(matches!(
            coefficient_of_variation(&seq(&[0.0, 0.0])),
            Err(MeasureError::DegenerateInput(_))
        ));
    }

    #[test]
    fn global_variance_examples() {
        let at3 = CorpusStats::with_mean(3.0, 10);
        assert_eq!(global_variance(&seq(&[3.0, 3.0]), &at3).unwrap(), 0.0);
        assert_eq!(global_variance(&seq(&[2.0, 4.0, 2.0]), &at3).unwrap(), 1.0);
        assert_eq!(global_variance(&seq(&[1.0]), &CorpusStats::with_mean(0.0, 1)).unwrap(), 1.0);
        let missing = CorpusStats { mean: None, token_count: 0 };
        assert_eq!(global_variance(&seq(&[1.0]), &missing), Err(MeasureError::MissingCorpusStats));
    }

    #[test]
    fn superlinear_mean_examples() {
        let s = seq(&[2.0, 4.0, 2.0]);
        assert_relative_eq!(superlinear_mean(&s, 1.0).unwrap(), 8.0 / 3.0, epsilon = 1e-12);
        assert_eq!(superlinear_mean(&s, 2.0).unwrap(), 8.0);
        assert_eq!(superlinear_mean(&seq(&[0.0, 0.0]), 2.0).unwrap(), 0.0);
        assert!(matches!(superlinear_mean(&s, 0.0), Err(MeasureError::InvalidExponent { .. })));
        assert!(matches!(superlinear_mean(&s, -1.0), Err(MeasureError::InvalidExponent { .. })));
    }

    #[test]
    fn slor_examples() {
        let s = SurprisalSequence::new("x", vec!["x".into()], vec![4.0], None).unwrap();
        assert_eq!(slor_with(&s, &[1.0], 2.0).unwrap(), 15.0);
        assert_eq!(slor_with(&seq(&[2.0, 2.0]), &[3.0, 3.0], 1.0).unwrap(), -1.0);

        let model = UnigramModel::build([vec!["a", "a", "b"]], 1.0).unwrap();
        let toks = vec!["a".to_owned(), "b".to_owned(), "zz".to_owned()];
        let unigram: Vec<f64> = toks.iter().map(|t| model.surprisal(t)).collect();
        let same = SurprisalSequence::new("u", toks, unigram, None).unwrap();
        for k in [0.5, 1.0, 2.0, 3.0] {
            assert_relative_eq!(slor(&same, &model, k).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert!(matches!(slor(&same, &model, 0.0), Err(MeasureError::InvalidExponent { .. })));
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&seq(&[1.0, 1.0, 1.0])).unwrap(), 0.0);
        assert_relative_eq!(gini(&seq(&[0.0, 0.0, 4.0])).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert!(matches!(gini(&seq(&[0.0])), Err(MeasureError::DegenerateInput(_))));
    }

    #[test]
    fn effort_examples() {
        assert_eq!(effort_uid(&seq(&[2.0, 2.0]), 2.0, 1.0).unwrap(), 10.0);
        assert_eq!(effort_uid(&seq(&[0.0, 0.0, 0.0]), 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            effort_uid(&seq(&[1.0]), 1.0, 0.0),
            Err(MeasureError::InvalidExponent { bound, .. }) if bound == 1.0
        ));
        assert_eq!(effort_uid(&seq(&[1.0]), 2.0, -1.0), Err(MeasureError::InvalidConstant(-1.0)));

        assert_eq!(effort_linear(&seq(&[2.0, 4.0, 2.0])), 8.0);
        assert_eq!(effort_linear(&seq(&[0.0])), 0.0);
        let a = seq(&[1.5, 2.0]);
        let b = seq(&[0.25, 3.0, 1.0]);
        assert_eq!(effort_linear(&a.concat(&b)), effort_linear(&a) + effort_linear(&b));
    }

    #[test]
    fn unigram_model_examples() {
        let model = UnigramModel::build([vec!["a", "a", "b"]], 1e-12).unwrap();
        assert_relative_eq!(model.surprisal("a"), -(2.0f64 / 3.0).ln(), epsilon = 1e-9);
        assert_relative_eq!(model.surprisal("a"), 0.4055, epsilon = 1e-4);
        let single = UnigramModel::build([vec!["a"]], 1e-12f64).unwrap();
        assert!(single.surprisal("a").abs() < 1e-9);
        let unseen = model.surprisal("never");
        assert!(unseen.is_finite() && unseen > 0.0);
        assert_eq!(model.total(), 3);
        assert_eq!(model.vocab_size(), 2);

        assert_eq!(
            UnigramModel::<f64>::build(Vec::<Vec<&str>>::new(), 1.0),
            Err(MeasureError::EmptyCorpus)
        );
        assert!(matches!(
            UnigramModel::build([vec!["a"]], 0.0f64),
            Err(MeasureError::InvalidSmoothing(_))
        ));
        let from_text = UnigramModel::<f64>::from_text_lines(["a a", " b "], 1.0).unwrap();
        assert_eq!(from_text.count("a"), 2);
        assert_eq!(from_text.total(), 3);
    }

    #[test]
    fn report_examples() {
        let s = seq(&[2.0, 4.0, 2.0]);
        let r = uniformity_report(&s, &ReportConfig::new([Measure::Lv, Measure::Cv])).unwrap();
        assert_eq!(r.values.len(), 2);
        assert_eq!(r.get(Measure::Lv), Some(4.0));
        assert_relative_eq!(r.get(Measure::Cv).unwrap(), 0.35355, epsilon = 1e-5);

        let empty = uniformity_report(&s, &ReportConfig::new([])).unwrap();
        assert!(empty.values.is_empty());

        let err = uniformity_report(&s, &ReportConfig::new([Measure::Gv])).unwrap_err();
        match err {
            MeasureError::Measure { measure, source } => {
                assert_eq!(measure, Measure::Gv);
                assert_eq!(*source, MeasureError::MissingCorpusStats);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert!("LV".parse::<Measure>().is_ok());
        assert!("nope".parse::<Measure>().is_err());
    }

    #[test]
    fn bits_conversion() {
        assert_relative_eq!(bits_to_nats(1.0f64), std::f64::consts::LN_2);
        assert_relative_eq!(nats_to_bits(bits_to_nats(3.5f64)), 3.5, epsilon = 1e-12);
    }

    #[test]
    fn k_sweep_covers_default_grid() {
        let grid = default_k_grid::<f64>();
        assert_eq!(grid.first(), Some(&0.5));
        assert_eq!(grid.last(), Some(&3.0));
        let s = seq(&[2.0, 4.0, 2.0]);
        let curve = sweep_k(&grid, |k| superlinear_mean(&s, k)).unwrap();
        assert_eq!(curve.len(), grid.len());
        assert!(curve.windows(2).all(|w| w[0].1 < w[1].1));
    }

    #[test]
    fn works_in_single_precision() {
        let s = SurprisalSequence::<f32>::from_surprisals("f", vec![2.0, 4.0, 2.0]).unwrap();
        assert_eq!(local_variance(&s).unwrap(), 4.0f32);
        assert!((gini(&s).unwrap() - 1.0f32 / 6.0).abs() < 1e-6);
    }
}
