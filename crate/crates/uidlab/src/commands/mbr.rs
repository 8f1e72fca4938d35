use std::path::Path;

use rayon::prelude::*;
use uidlab_core::metrics::mbr_from_matrix;
use uidlab_core::scoring::{score_checked, ScoreItem, ScorerError, SegmentScorer};

use super::{write_errors, Context, Summary};
use crate::error::CliError;
use crate::io::{create, read_jsonl, CandidatesRecord, ErrorRecord, JsonlWriter, MbrRecord, RankedCandidate};

pub const RANKED: &str = "mbr.jsonl";
pub const ERRORS: &str = "errors.jsonl";

/// `m[i][j] = metric(hyp = c_i, ref = c_j)` scored through a segment
/// scorer. The diagonal is `0.0` unless `include_self` is set.
pub fn utility_matrix(
    scorer: &dyn SegmentScorer,
    source: &str,
    candidates: &[String],
    include_self: bool,
    parallel: bool,
) -> Result<Vec<Vec<f64>>, ScorerError> {
    let n = candidates.len();
    let row = |i: usize| -> Result<Vec<f64>, ScorerError> {
        let cols: Vec<usize> = (0..n).filter(|&j| include_self || j != i).collect();
        let items: Vec<ScoreItem<'_>> = cols
            .iter()
            .map(|&j| {
                ScoreItem::new(&candidates[i])
                    .with_reference(&candidates[j])
                    .with_source(source)
            })
            .collect();
        let scores = score_checked(scorer, &items)?;
        let mut r = vec![0.0; n];
        for (j, s) in cols.into_iter().zip(scores) {
            r[j] = s;
        }
        Ok(r)
    };
    if parallel && scorer.is_local() {
        return (0..n).into_par_iter().map(row).collect();
    }
    // One request for the whole matrix keeps external scorers batched.
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| include_self || i != j)
        .collect();
    let items: Vec<ScoreItem<'_>> = pairs
        .iter()
        .map(|&(i, j)| {
            ScoreItem::new(&candidates[i])
                .with_reference(&candidates[j])
                .with_source(source)
        })
        .collect();
    let scores = score_checked(scorer, &items)?;
    let mut m = vec![vec![0.0; n]; n];
    for ((i, j), s) in pairs.into_iter().zip(scores) {
        m[i][j] = s;
    }
    Ok(m)
}

pub fn rank(ctx: &Context, scorer: &dyn SegmentScorer, rec: &CandidatesRecord) -> Result<MbrRecord, String> {
    let section = &ctx.config.mbr;
    let matrix = utility_matrix(scorer, &rec.source, &rec.candidates, section.include_self, section.parallel)
        .map_err(|e| e.to_string())?;
    let result = mbr_from_matrix(&matrix, section.include_self).map_err(|e| e.to_string())?;
    let mut ranking = result.ranking();
    if let Some(n) = section.top_n {
        ranking.truncate(n);
    }
    Ok(MbrRecord {
        id: rec.id.clone(),
        best: rec.candidates[result.winner].clone(),
        ranking: ranking
            .into_iter()
            .map(|(index, utility)| RankedCandidate {
                index,
                candidate: rec.candidates[index].clone(),
                utility,
            })
            .collect(),
    })
}

pub fn run(ctx: &Context, input: &Path) -> Result<Summary, CliError> {
    let metric = &ctx.config.mbr.metric;
    let scorer = ctx
        .registry
        .get(metric)
        .map_err(|e| CliError::config(e.to_string()))?;
    let path = ctx.path(RANKED);
    let mut out = JsonlWriter::new(create(&path)?);
    let mut errors = Vec::new();
    let mut records = 0;
    for (line, rec) in read_jsonl::<CandidatesRecord>(input)? {
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
        match rank(ctx, scorer.as_ref(), &rec) {
            Ok(ranked) => out.write(&ranked).map_err(|e| CliError::io(&path, e))?,
            Err(error) => errors.push(ErrorRecord {
                line,
                id: Some(rec.id),
                error,
            }),
        }
    }
    out.finish().map_err(|e| CliError::io(&path, e))?;
    let errors_path = ctx.path(ERRORS);
    write_errors(&errors_path, &errors)?;
    Ok(Summary {
        command: "mbr",
        records,
        errors: errors.len(),
        outputs: vec![path, errors_path],
    })
}
