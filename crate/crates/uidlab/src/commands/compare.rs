use std::path::Path;

use serde::{Deserialize, Serialize};
use uidlab_core::ga::{compare_to_baselines, Tally};

use super::{write_errors, Context, Summary};
use crate::error::CliError;
use crate::io::{read_jsonl, write_json, ErrorRecord, HeldOutRecord};

pub const COMPARE: &str = "compare.json";
pub const ERRORS: &str = "errors.jsonl";

/// A tally with its percentages over the example set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TallyReport {
    pub plus: usize,
    pub minus: usize,
    pub equal: usize,
    pub pct_plus: f64,
    pub pct_minus: f64,
    pub pct_equal: f64,
}

impl From<Tally> for TallyReport {
    fn from(t: Tally) -> Self {
        let (pct_plus, pct_minus, pct_equal) = t.percentages();
        Self {
            plus: t.plus,
            minus: t.minus,
            equal: t.equal,
            pct_plus,
            pct_minus,
            pct_equal,
        }
    }
}

/// How the GA output's held-out score compares with each baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareReport {
    pub examples: usize,
    pub logprob: TallyReport,
    pub mbr: TallyReport,
}

pub fn compare_records(records: &[HeldOutRecord]) -> CompareReport {
    let col = |f: fn(&HeldOutRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let cmp = compare_to_baselines(&col(|r| r.ga), &col(|r| r.logprob), &col(|r| r.mbr))
        .expect("columns of one record list have equal length");
    CompareReport {
        examples: records.len(),
        logprob: cmp.logprob.into(),
        mbr: cmp.mbr.into(),
    }
}

pub fn run(ctx: &Context, input: &Path) -> Result<Summary, CliError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut total = 0;
    for (line, rec) in read_jsonl::<HeldOutRecord>(input)? {
        total += 1;
        match rec {
            Ok(r) if [r.ga, r.logprob, r.mbr].iter().all(|x| x.is_finite()) => records.push(r),
            Ok(r) => errors.push(ErrorRecord {
                line,
                id: Some(r.id),
                error: "non-finite score".into(),
            }),
            Err(e) => errors.push(ErrorRecord {
                line,
                id: None,
                error: e.message,
            }),
        }
    }
    let path = ctx.path(COMPARE);
    write_json(&path, &compare_records(&records))?;
    let errors_path = ctx.path(ERRORS);
    write_errors(&errors_path, &errors)?;
    Ok(Summary {
        command: "compare",
        records: total,
        errors: errors.len(),
        outputs: vec![path, errors_path],
    })
}
