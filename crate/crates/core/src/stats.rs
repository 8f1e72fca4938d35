//! Pearson correlation, simple least squares, cross-group pairing and
//! quality-threshold sweeps.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::{Measure, UniformityReport};
use crate::scalar::{sum_ltr, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ: {ids} ids, {x} x values, {y} y values")]
    LengthMismatch { ids: usize, x: usize, y: usize },
    #[error("series has {0} points, need at least 2")]
    TooShort(usize),
    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("{0} variable has zero variance")]
    ZeroVariance(&'static str),
    #[error("ids present in only one group: {0:?}")]
    UnpairedId(Vec<String>),
    #[error("id '{id}' appears more than once in group '{group}'")]
    DuplicateId { id: String, group: String },
    #[error("report for id '{id}' lacks measure {measure}")]
    MissingMeasure { id: String, measure: Measure },
    #[error("thresholds must be strictly ascending")]
    UnsortedThresholds,
    #[error("quality score for '{0}' is not finite")]
    NonFiniteScore(String),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;

/// Paired observations `(x_i, y_i)` labelled by id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries<T> {
    ids: Vec<String>,
    x: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> PairedSeries<T> {
    pub fn new(ids: Vec<String>, x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if ids.len() != x.len() || x.len() != y.len() {
            return Err(StatsError::LengthMismatch {
                ids: ids.len(),
                x: x.len(),
                y: y.len(),
            });
        }
        if let Some(i) = x.iter().zip(&y).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(StatsError::NonFinite(i));
        }
        Ok(Self { ids, x, y })
    }

    /// Series with positional ids `0, 1, ...`.
    pub fn from_xy(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let ids = (0..x.len()).map(|i| i.to_string()).collect();
        Self::new(ids, x, y)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn centered_moments(&self) -> Result<(T, T, T, T, T)> {
        let n = self.len();
        if n < 2 {
            return Err(StatsError::TooShort(n));
        }
        let nn = T::from_len(n);
        let mx = sum_ltr(self.x.iter().copied()) / nn;
        let my = sum_ltr(self.y.iter().copied()) / nn;
        let sxx = sum_ltr(self.x.iter().map(|&a| (a - mx) * (a - mx)));
        let syy = sum_ltr(self.y.iter().map(|&b| (b - my) * (b - my)));
        let sxy = sum_ltr(self.x.iter().zip(&self.y).map(|(&a, &b)| (a - mx) * (b - my)));
        Ok((mx, my, sxx, syy, sxy))
    }
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson_r<T: Real>(series: &PairedSeries<T>) -> Result<T> {
    let (_, _, sxx, syy, sxy) = series.centered_moments()?;
    if sxx == T::zero() {
        return Err(StatsError::ZeroVariance("x"));
    }
    if syy == T::zero() {
        return Err(StatsError::ZeroVariance("y"));
    }
    let prod = sxx * syy;
    let denom = if prod.is_finite() && prod > T::zero() {
        prod.sqrt()
    } else {
        sxx.sqrt() * syy.sqrt()
    };
    let r = sxy / denom;
    Ok(r.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

impl<T: Real> OlsFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.slope * x + self.intercept
    }
}

/// Ordinary least squares line `y ≈ slope·x + intercept`. A constant target
/// gives `r² = 0`.
pub fn ols_fit<T: Real>(series: &PairedSeries<T>) -> Result<OlsFit<T>> {
    let (mx, my, sxx, syy, sxy) = series.centered_moments()?;
    if sxx == T::zero() {
        return Err(StatsError::ZeroVariance("x"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == T::zero() {
        T::zero()
    } else {
        let ss_res = sum_ltr(series.x.iter().zip(&series.y).map(|(&a, &b)| {
            let e = b - (slope * a + intercept);
            e * e
        }));
        (T::one() - ss_res / syy).max(T::zero()).min(T::one())
    };
    Ok(OlsFit {
        slope,
        intercept,
        r_squared,
    })
}

fn index_group<'a, T: Real>(
    reports: &'a [UniformityReport<T>],
    group: &str,
) -> Result<BTreeMap<&'a str, &'a UniformityReport<T>>> {
    let mut out = BTreeMap::new();
    for r in reports.iter().filter(|r| r.group.as_deref() == Some(group)) {
        if out.insert(r.id.as_str(), r).is_some() {
            return Err(StatsError::DuplicateId {
                id: r.id.clone(),
                group: group.to_owned(),
            });
        }
    }
    Ok(out)
}

/// Pairs the reports of two groups by id and builds the measure series.
pub fn pair_groups<T: Real>(
    reports: &[UniformityReport<T>],
    measure: Measure,
    group_a: &str,
    group_b: &str,
) -> Result<PairedSeries<T>> {
    let a = index_group(reports, group_a)?;
    let b = index_group(reports, group_b)?;
    let ka: BTreeSet<&str> = a.keys().copied().collect();
    let kb: BTreeSet<&str> = b.keys().copied().collect();
    let unpaired: Vec<String> = ka.symmetric_difference(&kb).map(|s| (*s).to_owned()).collect();
    if !unpaired.is_empty() {
        return Err(StatsError::UnpairedId(unpaired));
    }
    let value = |r: &UniformityReport<T>| {
        r.get(measure).ok_or_else(|| StatsError::MissingMeasure {
            id: r.id.clone(),
            measure,
        })
    };
    let mut ids = Vec::with_capacity(a.len());
    let mut x = Vec::with_capacity(a.len());
    let mut y = Vec::with_capacity(a.len());
    for (id, ra) in &a {
        ids.push((*id).to_owned());
        x.push(value(ra)?);
        y.push(value(b[id])?);
    }
    PairedSeries::new(ids, x, y)
}

/// Pearson r of one measure between two groups, paired by record id.
pub fn correlate_groups<T: Real>(
    reports: &[UniformityReport<T>],
    measure: Measure,
    group_a: &str,
    group_b: &str,
) -> Result<T> {
    pearson_r(&pair_groups(reports, measure, group_a, group_b)?)
}

/// One filterable item: a translation quality score and the measure values
/// of the groups it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityItem<T> {
    pub id: String,
    pub score: T,
    pub values: BTreeMap<String, T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary<T> {
    pub count: usize,
    /// `None` when no retained item carries the group.
    pub mean: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint<T> {
    pub threshold: T,
    pub retained: usize,
    pub groups: BTreeMap<String, GroupSummary<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve<T> {
    pub points: Vec<ThresholdPoint<T>>,
}

impl<T: Real> ThresholdCurve<T> {
    pub fn thresholds(&self) -> Vec<T> {
        self.points.iter().map(|p| p.threshold).collect()
    }

    pub fn retained_counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.retained).collect()
    }
}

/// For each threshold `t`, keeps items with `score >= t` and averages each
/// group's measure over them. Empty filters yield a point with count 0 and
/// undefined means rather than an error.
pub fn threshold_sweep<T: Real>(items: &[QualityItem<T>], thresholds: &[T]) -> Result<ThresholdCurve<T>> {
    if thresholds.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) || thresholds.iter().any(|t| t.is_nan()) {
        return Err(StatsError::UnsortedThresholds);
    }
    if let Some(bad) = items.iter().find(|i| !i.score.is_finite()) {
        return Err(StatsError::NonFiniteScore(bad.id.clone()));
    }
    let all_groups: BTreeSet<&str> = items.iter().flat_map(|i| i.values.keys().map(String::as_str)).collect();
    let points = thresholds
        .iter()
        .map(|&t| {
            let kept: Vec<&QualityItem<T>> = items.iter().filter(|i| i.score >= t).collect();
            let groups = all_groups
                .iter()
                .map(|&g| {
                    let vals: Vec<T> = kept.iter().filter_map(|i| i.values.get(g).copied()).collect();
                    let mean = (!vals.is_empty()).then(|| sum_ltr(vals.iter().copied()) / T::from_len(vals.len()));
                    (
                        g.to_owned(),
                        GroupSummary {
                            count: vals.len(),
                            mean,
                        },
                    )
                })
                .collect();
            ThresholdPoint {
                threshold: t,
                retained: kept.len(),
                groups,
            }
        })
        .collect();
    Ok(ThresholdCurve { points })
}
