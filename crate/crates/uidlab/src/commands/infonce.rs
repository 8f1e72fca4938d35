use std::path::Path;

use serde::{Deserialize, Serialize};
use uidlab_core::infonce::{gradcheck, BilinearParams, EmbeddingBatch};

use super::{Context, Summary};
use crate::config::InfoNceSection;
use crate::error::CliError;
use crate::io::{write_json, InfoNceFile, InfoNceRecord};

pub const REPORT: &str = "infonce.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchCheck {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_relative_error: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoNceReport {
    pub batches: Vec<BatchCheck>,
    /// Mean loss over the batches that could be evaluated.
    pub mean_loss: Option<f64>,
    pub passed: bool,
    pub h: f64,
    pub tolerance: f64,
}

pub fn check_record(index: usize, rec: InfoNceRecord, section: &InfoNceSection) -> BatchCheck {
    let fail = |error: String| BatchCheck {
        index,
        loss: None,
        max_relative_error: None,
        passed: false,
        error: Some(error),
    };
    if rec.w.len() != rec.d {
        return fail(format!("W has {} rows, d is {}", rec.w.len(), rec.d));
    }
    let params = match BilinearParams::from_rows(&rec.w) {
        Ok(p) => p.frozen(section.frozen_targets).with_denominator(section.denominator),
        Err(e) => return fail(e.to_string()),
    };
    let batch = match EmbeddingBatch::new(rec.context, rec.positive, rec.negatives) {
        Ok(b) => b,
        Err(e) => return fail(e.to_string()),
    };
    match gradcheck::check(&batch, &params, section.h, section.tolerance) {
        Ok(g) => BatchCheck {
            index,
            loss: Some(g.loss),
            max_relative_error: Some(g.max_relative_error),
            passed: g.passed,
            error: None,
        },
        Err(e) => fail(e.to_string()),
    }
}

pub fn run(ctx: &Context, input: &Path) -> Result<Summary, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let file: InfoNceFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let section = &ctx.config.infonce;
    let batches: Vec<BatchCheck> = file
        .into_batches()
        .into_iter()
        .enumerate()
        .map(|(i, rec)| check_record(i, rec, section))
        .collect();
    let losses: Vec<f64> = batches.iter().filter_map(|b| b.loss).collect();
    let mean_loss = (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64);
    let errors = batches.iter().filter(|b| b.error.is_some()).count();
    let report = InfoNceReport {
        passed: !batches.is_empty() && batches.iter().all(|b| b.passed),
        mean_loss,
        h: section.h,
        tolerance: section.tolerance,
        batches,
    };
    let path = ctx.path(REPORT);
    write_json(&path, &report)?;
    Ok(Summary {
        command: "infonce-check",
        records: report.batches.len(),
        errors,
        outputs: vec![path],
    })
}
