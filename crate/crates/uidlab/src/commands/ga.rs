use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uidlab_core::ga::{
    robustness_report, run_ga, ExampleOutcome, FitnessContext, FitnessEvaluator, FitnessSpec, MutationPools,
    RobustnessConfig,
};

use super::compare::{compare_records, COMPARE};
use super::{write_errors, Context, Summary};
use crate::config::{GaSection, HeldOutSpec};
use crate::error::CliError;
use crate::io::{
    self, read_jsonl, write_json, write_jsonl, AdversarialRecord, CandidatesRecord, ErrorRecord, HeldOutRecord,
    RunRecord, TraceEntry,
};

pub const RUNS: &str = "runs.jsonl";
pub const HELD_OUT: &str = "heldout.jsonl";
pub const ROBUSTNESS: &str = "robustness.json";
pub const ADVERSARIAL: &str = "adversarial.jsonl";
pub const ERRORS: &str = "errors.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub id: String,
    #[serde(flatten)]
    pub outcome: ExampleOutcome,
}

/// The robustness report with example ids and the margins used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessFile {
    pub held_out: HeldOutSpec,
    pub margins: RobustnessConfig,
    pub total: usize,
    pub n_opt_improved: usize,
    pub n_adversarial: usize,
    pub examples: Vec<ExampleReport>,
}

/// Results for one example before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleResult {
    pub run: RunRecord,
    pub initial: String,
    pub reference: Option<String>,
    pub o_init: f64,
    pub o_ga: f64,
    /// Held-out scores of the initial, GA and reranked candidates.
    pub held_out: Option<[f64; 3]>,
}

/// Dictionary and wordlist shared by every example.
#[derive(Debug, Clone, Default)]
pub struct SharedPools {
    pub dictionary: BTreeMap<String, Vec<String>>,
    pub wordlist: BTreeSet<String>,
}

impl SharedPools {
    pub fn load(section: &GaSection) -> Result<Self, CliError> {
        let dictionary = match &section.dictionary {
            Some(p) => io::parse_dictionary(io::open(p)?).map_err(|source| CliError::Parse {
                path: p.clone(),
                source,
            })?,
            None => BTreeMap::new(),
        };
        let wordlist = match &section.wordlist {
            Some(p) => io::parse_wordlist(io::open(p)?).map_err(|e| CliError::io(p, e))?,
            None => BTreeSet::new(),
        };
        Ok(Self { dictionary, wordlist })
    }
}

fn weighted(spec: &FitnessSpec, indices: &[usize], scores: &[f64]) -> f64 {
    indices.iter().map(|&i| spec.components[i].weight * scores[i]).sum()
}

/// Runs the GA on one example and scores the outcome.
pub fn run_example(
    ctx: &Context,
    section: &GaSection,
    shared: &SharedPools,
    rec: &CandidatesRecord,
    index: usize,
) -> Result<ExampleResult, String> {
    if rec.candidates.is_empty() {
        return Err("no initial candidates".into());
    }
    let references = rec.references.clone().unwrap_or_default();
    let context = FitnessContext::new(&rec.source, &references, &rec.candidates);
    let spec = section.fitness_spec();
    let mut evaluating = context.clone();
    evaluating.evolving_pool = section.evolving_pool;
    let mut evaluator = FitnessEvaluator::new(spec.clone(), &ctx.registry, evaluating)
        .map_err(|e| e.to_string())?
        .with_parallel(section.parallel);
    let pools = MutationPools {
        dictionary: shared.dictionary.clone(),
        wordlist: shared.wordlist.clone(),
        weights: section.pool_weights,
        ..MutationPools::from_initials(&rec.candidates)
    };
    let mut config = section.search.clone();
    config.seed = config.seed.wrapping_add(index as u64);
    let outcome = run_ga(&rec.candidates, &mut evaluator, &pools, &config).map_err(|e| e.to_string())?;
    let best = outcome.best.text();

    // Scores against the initial pool, whatever pool the search used.
    if section.evolving_pool {
        evaluator.set_pseudo_refs(&rec.candidates);
    }
    let mut texts = rec.candidates.clone();
    texts.push(best.clone());
    let scores = evaluator.component_scores(&texts).map_err(|e| e.to_string())?;
    let fitness: Vec<f64> = scores.iter().map(|s| evaluator.combine(s)).collect();
    let n = rec.candidates.len();
    let mut reranked = 0;
    for i in 1..n {
        if fitness[i] > fitness[reranked] {
            reranked = i;
        }
    }
    let optimized = spec.optimized();
    let o_init = weighted(&spec, &optimized, &scores[0]);
    let o_ga = weighted(&spec, &optimized, &scores[n]);

    let held_out = match section.effective_held_out() {
        Some(h) => {
            let mut judge = FitnessEvaluator::new(FitnessSpec::single(h.metric, h.mode), &ctx.registry, context)
                .map_err(|e| e.to_string())?;
            let picked = [rec.candidates[0].clone(), best.clone(), rec.candidates[reranked].clone()];
            let s = judge.component_scores(&picked).map_err(|e| e.to_string())?;
            Some([s[0][0], s[1][0], s[2][0]])
        }
        None => None,
    };

    Ok(ExampleResult {
        run: RunRecord {
            id: rec.id.clone(),
            best,
            fitness: outcome.best.fitness().unwrap_or(f64::NAN),
            trace: outcome.trace.generations.iter().map(TraceEntry::from).collect(),
        },
        initial: rec.candidates[0].clone(),
        reference: references.first().cloned(),
        o_init,
        o_ga,
        held_out,
    })
}

fn check_metrics(ctx: &Context, section: &GaSection) -> Result<(), CliError> {
    let mut ids: Vec<&str> = section.fitness.iter().map(|c| c.metric.as_str()).collect();
    let held = section.effective_held_out();
    if let Some(h) = &held {
        ids.push(&h.metric);
    }
    for id in ids {
        if !ctx.registry.contains(id) {
            return Err(CliError::config(format!("metric '{id}' is neither built in nor a registered scorer")));
        }
    }
    Ok(())
}

/// `ga`, or `adversarial` when `adversarial` is set.
pub fn run(ctx: &Context, input: &Path, adversarial: bool) -> Result<Summary, CliError> {
    let mut section = ctx.config.ga.clone();
    if adversarial {
        section.make_adversarial()?;
    }
    check_metrics(ctx, &section)?;
    let shared = SharedPools::load(&section)?;

    let lines: Vec<_> = read_jsonl::<CandidatesRecord>(input)?.collect();
    let work = |(index, (line, rec)): (usize, &(usize, Result<CandidatesRecord, crate::error::ParseError>))| {
        let line = *line;
        match rec {
            Err(e) => Err(ErrorRecord {
                line,
                id: None,
                error: e.message.clone(),
            }),
            Ok(rec) => run_example(ctx, &section, &shared, rec, index).map_err(|error| ErrorRecord {
                line,
                id: Some(rec.id.clone()),
                error,
            }),
        }
    };
    let results: Vec<Result<ExampleResult, ErrorRecord>> = if section.parallel {
        lines.par_iter().enumerate().map(work).collect()
    } else {
        lines.iter().enumerate().map(work).collect()
    };

    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(x) => ok.push(x),
            Err(e) => errors.push(e),
        }
    }

    let runs_path = ctx.path(RUNS);
    write_jsonl(&runs_path, &ok.iter().map(|r| r.run.clone()).collect::<Vec<_>>())?;
    let mut outputs = vec![runs_path];

    if let Some(held) = section.effective_held_out() {
        let held_records: Vec<HeldOutRecord> = ok
            .iter()
            .filter_map(|r| {
                r.held_out.map(|h| HeldOutRecord {
                    id: r.run.id.clone(),
                    ga: h[1],
                    logprob: h[0],
                    mbr: h[2],
                })
            })
            .collect();
        let held_path = ctx.path(HELD_OUT);
        write_jsonl(&held_path, &held_records)?;

        let with_h: Vec<&ExampleResult> = ok.iter().filter(|r| r.held_out.is_some()).collect();
        let col = |f: &dyn Fn(&ExampleResult) -> f64| with_h.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let h = |i: usize| move |r: &ExampleResult| r.held_out.map_or(f64::NAN, |h| h[i]);
        let report = robustness_report(
            &col(&|r| r.o_init),
            &col(&|r| r.o_ga),
            &col(&h(0)),
            &col(&h(1)),
            &section.margins,
        )
        .map_err(|e| CliError::Input(e.to_string()))?;
        let file = RobustnessFile {
            held_out: held,
            margins: section.margins,
            total: report.len(),
            n_opt_improved: report.n_opt_improved,
            n_adversarial: report.n_adversarial,
            examples: with_h
                .iter()
                .zip(&report.examples)
                .map(|(r, o)| ExampleReport {
                    id: r.run.id.clone(),
                    outcome: *o,
                })
                .collect(),
        };
        let robustness_path = ctx.path(ROBUSTNESS);
        write_json(&robustness_path, &file)?;
        let compare_path = ctx.path(COMPARE);
        write_json(&compare_path, &compare_records(&held_records))?;
        outputs.extend([held_path, robustness_path, compare_path]);

        if section.fitness_spec().has_negative_weight() {
            let adversarial_records: Vec<AdversarialRecord> = with_h
                .iter()
                .zip(&report.examples)
                .filter(|(_, o)| o.adversarial)
                .map(|(r, _)| AdversarialRecord {
                    id: r.run.id.clone(),
                    mt: r.initial.clone(),
                    post_ga: r.run.best.clone(),
                    reference: r.reference.clone(),
                    mt_score: r.o_init,
                    ga_score: r.o_ga,
                })
                .collect();
            let adversarial_path = ctx.path(ADVERSARIAL);
            write_jsonl(&adversarial_path, &adversarial_records)?;
            outputs.push(adversarial_path);
        }
    }

    let errors_path = ctx.path(ERRORS);
    write_errors(&errors_path, &errors)?;
    outputs.push(errors_path);
    Ok(Summary {
        command: if adversarial { "adversarial" } else { "ga" },
        records: lines.len(),
        errors: errors.len(),
        outputs,
    })
}
