use serde::{Deserialize, Serialize};

use super::{GaError, Result};

/// Margins `m_o` (optimized metric) and `m_h` (held-out metric).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustnessConfig {
    pub margin_optimized: f64,
    pub margin_held_out: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleOutcome {
    pub o_init: f64,
    pub o_ga: f64,
    pub h_init: f64,
    pub h_ga: f64,
    pub improved: bool,
    pub adversarial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub examples: Vec<ExampleOutcome>,
    pub n_opt_improved: usize,
    pub n_adversarial: usize,
}

impl RobustnessReport {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Counts examples with `O_init + m_o < O_ga`, and among those the ones
/// that also satisfy `H_init > H_ga + m_h`.
pub fn robustness_report(
    o_init: &[f64],
    o_ga: &[f64],
    h_init: &[f64],
    h_ga: &[f64],
    config: &RobustnessConfig,
) -> Result<RobustnessReport> {
    let n = o_init.len();
    for other in [o_ga.len(), h_init.len(), h_ga.len()] {
        if other != n {
            return Err(GaError::LengthMismatch { expected: n, got: other });
        }
    }
    let examples: Vec<ExampleOutcome> = (0..n)
        .map(|i| {
            let improved = o_init[i] + config.margin_optimized < o_ga[i];
            let adversarial = improved && h_init[i] > h_ga[i] + config.margin_held_out;
            ExampleOutcome {
                o_init: o_init[i],
                o_ga: o_ga[i],
                h_init: h_init[i],
                h_ga: h_ga[i],
                improved,
                adversarial,
            }
        })
        .collect();
    Ok(RobustnessReport {
        n_opt_improved: examples.iter().filter(|e| e.improved).count(),
        n_adversarial: examples.iter().filter(|e| e.adversarial).count(),
        examples,
    })
}

/// How often GA output beats (+), loses to (-) or ties (=) a baseline on the
/// held-out metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub plus: usize,
    pub minus: usize,
    pub equal: usize,
}

impl Tally {
    pub fn total(&self) -> usize {
        self.plus + self.minus + self.equal
    }

    /// `(+, -, =)` as percentages; all zero for an empty tally.
    pub fn percentages(&self) -> (f64, f64, f64) {
        let n = self.total();
        if n == 0 {
            return (0.0, 0.0, 0.0);
        }
        let pct = |k: usize| 100.0 * k as f64 / n as f64;
        (pct(self.plus), pct(self.minus), pct(self.equal))
    }
}

pub fn compare_to_baseline(ga_held_out: &[f64], baseline_held_out: &[f64]) -> Result<Tally> {
    if ga_held_out.len() != baseline_held_out.len() {
        return Err(GaError::LengthMismatch {
            expected: ga_held_out.len(),
            got: baseline_held_out.len(),
        });
    }
    let mut t = Tally::default();
    for (g, b) in ga_held_out.iter().zip(baseline_held_out) {
        if g > b {
            t.plus += 1;
        } else if g < b {
            t.minus += 1;
        } else {
            t.equal += 1;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub logprob: Tally,
    pub mbr: Tally,
}

/// Held-out scores of the GA output against the best-log-prob initial
/// candidate and the reranked best initial candidate.
pub fn compare_to_baselines(ga_held_out: &[f64], logprob_held_out: &[f64], mbr_held_out: &[f64]) -> Result<BaselineComparison> {
    Ok(BaselineComparison {
        logprob: compare_to_baseline(ga_held_out, logprob_held_out)?,
        mbr: compare_to_baseline(ga_held_out, mbr_held_out)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let r = robustness_report(&[0.5, 0.6], &[0.7, 0.55], &[0.8, 0.7], &[0.6, 0.75], &RobustnessConfig::default()).unwrap();
        assert_eq!((r.n_opt_improved, r.n_adversarial), (1, 1));

        let same = robustness_report(&[0.1, 0.2], &[0.1, 0.2], &[0.5, 0.5], &[0.0, 0.0], &RobustnessConfig::default()).unwrap();
        assert_eq!((same.n_opt_improved, same.n_adversarial), (0, 0));

        let flat_h = robustness_report(&[0.1, 0.2, 0.3], &[0.5, 0.6, 0.7], &[0.4; 3], &[0.4; 3], &RobustnessConfig::default()).unwrap();
        assert_eq!((flat_h.n_opt_improved, flat_h.n_adversarial), (3, 0));

        let margin = RobustnessConfig {
            margin_optimized: 0.25,
            margin_held_out: 0.0,
        };
        let m = robustness_report(&[0.5, 0.6], &[0.7, 0.55], &[0.8, 0.7], &[0.6, 0.75], &margin).unwrap();
        assert_eq!(m.n_opt_improved, 0);

        assert!(matches!(
            robustness_report(&[0.1], &[0.1, 0.2], &[0.1], &[0.1], &RobustnessConfig::default()),
            Err(GaError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tally_examples() {
        let t = compare_to_baseline(&[0.9, 0.5], &[0.8, 0.5]).unwrap();
        assert_eq!(t.percentages(), (50.0, 0.0, 50.0));
        let same = compare_to_baseline(&[0.3, 0.1, 0.2], &[0.3, 0.1, 0.2]).unwrap();
        assert_eq!(same.percentages(), (0.0, 0.0, 100.0));
        let empty = compare_to_baseline(&[], &[]).unwrap();
        assert_eq!(empty.total(), 0);
        assert_eq!(empty.percentages(), (0.0, 0.0, 0.0));
        assert!(compare_to_baseline(&[1.0], &[]).is_err());

        let both = compare_to_baselines(&[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(both.logprob, Tally { plus: 1, minus: 0, equal: 1 });
        assert_eq!(both.mbr, Tally { plus: 0, minus: 1, equal: 1 });
    }
}
