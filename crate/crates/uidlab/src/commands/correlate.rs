use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use uidlab_core::measures::{Measure, ReportParams, UniformityReport};
use uidlab_core::stats::{correlate_groups, threshold_sweep, QualityItem, StatsError};

use super::measure::MeasureEngine;
use super::{write_errors, Context, Summary};
use crate::error::CliError;
use crate::io::{create, read_jsonl, write_threshold_csv, CorrelationTable, ErrorRecord, QualityRecord, SurprisalRecord, ThresholdRow};

pub const CORRELATIONS: &str = "correlations.csv";
pub const ERRORS: &str = "errors.jsonl";

pub fn threshold_file(measure: Measure) -> String {
    format!("threshold_{}.csv", measure.name())
}

/// Eleven evenly spaced thresholds from the lowest to the highest score.
pub fn default_thresholds(scores: &[f64]) -> Vec<f64> {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return Vec::new();
    }
    if lo == hi {
        return vec![lo];
    }
    let mut t: Vec<f64> = (0..=10).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect();
    t[10] = hi;
    t.dedup();
    t
}

pub fn run(ctx: &Context, input: &Path, quality: Option<&Path>) -> Result<Summary, CliError> {
    let section = &ctx.config.measure;
    let engine = MeasureEngine::prepare(section, input)?;
    let measures = section.selected();
    let mut errors: Vec<ErrorRecord> = Vec::new();
    let mut reports: Vec<UniformityReport<f64>> = Vec::new();
    let mut records = 0;

    for (line, rec) in read_jsonl::<SurprisalRecord>(input)? {
        records += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                errors.push(ErrorRecord {
                    line,
                    id: None,
                    error: e.message,
                });
                continue;
            }
        };
        let id = rec.id.clone();
        if rec.group.is_none() {
            errors.push(ErrorRecord {
                line,
                id: Some(id),
                error: "record has no group to pair on".into(),
            });
            continue;
        }
        match rec.into_sequence() {
            Ok(seq) => {
                let r = engine.evaluate(&seq);
                reports.push(UniformityReport {
                    id: r.id,
                    group: r.group,
                    values: r.values,
                    params: ReportParams {
                        k: r.k,
                        c: r.c,
                        corpus_mean: r.corpus_mean,
                    },
                });
            }
            Err(e) => errors.push(ErrorRecord {
                line,
                id: Some(id),
                error: e.to_string(),
            }),
        }
    }

    let groups: Vec<String> = reports
        .iter()
        .filter_map(|r| r.group.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let mut rows = Vec::new();
    for &m in &measures {
        let mut cells = Vec::with_capacity(pairs.len());
        for (a, b) in &pairs {
            match correlate_groups(&reports, m, a, b) {
                Ok(r) => cells.push(Some(r)),
                Err(e @ StatsError::UnpairedId(_)) => return Err(e.into()),
                Err(_) => cells.push(None),
            }
        }
        rows.push((m, cells));
    }
    let table = CorrelationTable {
        columns: pairs.iter().map(|(a, b)| format!("{a}~{b}")).collect(),
        rows,
    };
    let corr_path = ctx.path(CORRELATIONS);
    table
        .write(create(&corr_path)?)
        .map_err(|e| CliError::io(&corr_path, e.into()))?;
    let mut outputs = vec![corr_path];

    if let Some(quality) = quality {
        outputs.extend(threshold_curves(ctx, quality, &reports, &measures, &mut errors)?);
    }

    let errors_path = ctx.path(ERRORS);
    write_errors(&errors_path, &errors)?;
    outputs.push(errors_path);
    Ok(Summary {
        command: "correlate",
        records,
        errors: errors.len(),
        outputs,
    })
}

fn threshold_curves(
    ctx: &Context,
    quality: &Path,
    reports: &[UniformityReport<f64>],
    measures: &[Measure],
    errors: &mut Vec<ErrorRecord>,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut scores: Vec<QualityRecord> = Vec::new();
    for (line, rec) in read_jsonl::<QualityRecord>(quality)? {
        match rec {
            Ok(r) if r.score.is_finite() => scores.push(r),
            Ok(r) => errors.push(ErrorRecord {
                line,
                id: Some(r.id),
                error: "non-finite quality score".into(),
            }),
            Err(e) => errors.push(ErrorRecord {
                line,
                id: None,
                error: format!("{}: {}", quality.display(), e.message),
            }),
        }
    }
    let systems: BTreeSet<&str> = scores.iter().map(|s| s.system.as_str()).collect();
    let system = match (&ctx.config.correlate.quality_system, systems.len()) {
        (Some(s), _) => s.clone(),
        (None, 0) => return Ok(Vec::new()),
        (None, 1) => systems.iter().next().copied().unwrap_or_default().to_owned(),
        (None, _) => {
            return Err(CliError::config(format!(
                "quality file holds systems {systems:?}; choose one with --quality-system"
            )))
        }
    };
    let selected: Vec<&QualityRecord> = scores.iter().filter(|s| s.system == system).collect();
    let thresholds = match &ctx.config.correlate.thresholds {
        Some(t) => t.clone(),
        None => default_thresholds(&selected.iter().map(|s| s.score).collect::<Vec<_>>()),
    };

    // (id, group) -> report
    let by_key: BTreeMap<(&str, &str), &UniformityReport<f64>> = reports
        .iter()
        .filter_map(|r| r.group.as_deref().map(|g| ((r.id.as_str(), g), r)))
        .collect();
    let groups: BTreeSet<&str> = reports.iter().filter_map(|r| r.group.as_deref()).collect();

    let mut outputs = Vec::new();
    for &m in measures {
        let items: Vec<QualityItem<f64>> = selected
            .iter()
            .map(|q| QualityItem {
                id: q.id.clone(),
                score: q.score,
                values: groups
                    .iter()
                    .filter_map(|g| {
                        by_key
                            .get(&(q.id.as_str(), *g))
                            .and_then(|r| r.get(m))
                            .map(|v| ((*g).to_owned(), v))
                    })
                    .collect(),
            })
            .collect();
        let curve = threshold_sweep(&items, &thresholds)?;
        let rows: Vec<ThresholdRow> = curve
            .points
            .iter()
            .flat_map(|p| {
                p.groups.iter().map(move |(g, s)| ThresholdRow {
                    threshold: p.threshold,
                    group: g.clone(),
                    count: s.count,
                    mean: s.mean,
                })
            })
            .collect();
        let path = ctx.path(&threshold_file(m));
        write_threshold_csv(create(&path)?, m, &rows).map_err(|e| CliError::io(&path, e.into()))?;
        outputs.push(path);
    }
    Ok(outputs)
}
