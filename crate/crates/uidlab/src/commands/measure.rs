use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use uidlab_core::measures::{
    measure_value, superlinear_mean, CorpusStats, MeanAccumulator, Measure, ReportConfig, SurprisalSequence, UnigramModel,
};

use super::{write_errors, Context, Summary};
use crate::config::MeasureSection;
use crate::error::CliError;
use crate::io::{self, create, read_jsonl, ErrorRecord, JsonlWriter, MeasureRecord, SummaryRow, SurprisalRecord};
use crate::scorer::{fetch_surprisals, HttpOptions};

pub const REPORTS: &str = "reports.jsonl";
pub const SUMMARY: &str = "summary.csv";
pub const ERRORS: &str = "errors.jsonl";
pub const K_SWEEP: &str = "k_sweep.csv";
pub const FETCHED: &str = "surprisals.jsonl";

/// Group label used in CSV output for records without a group.
fn label(group: &Option<String>) -> String {
    group.clone().unwrap_or_default()
}

/// Computes measures for one sequence against corpus statistics and a
/// unigram model prepared from a first pass over the data.
pub(crate) struct MeasureEngine {
    measures: Vec<Measure>,
    k: f64,
    c: f64,
    global_mean: bool,
    corpus: BTreeMap<Option<String>, CorpusStats<f64>>,
    global: CorpusStats<f64>,
    unigram: Option<UnigramModel<f64>>,
    unigram_error: Option<String>,
}

impl MeasureEngine {
    pub(crate) fn prepare(section: &MeasureSection, input: &Path) -> Result<Self, CliError> {
        let measures = section.selected();
        // Corpus means, accumulated in file order.
        let mut groups: BTreeMap<Option<String>, MeanAccumulator<f64>> = BTreeMap::new();
        let mut all = MeanAccumulator::new();
        for (_, rec) in read_jsonl::<SurprisalRecord>(input)? {
            let Ok(rec) = rec else { continue };
            let Ok(seq) = rec.into_sequence() else { continue };
            let acc = groups.entry(seq.group().map(str::to_owned)).or_default();
            acc.extend(seq.surprisals().iter().copied());
            all.extend(seq.surprisals().iter().copied());
        }
        let corpus = groups.iter().map(|(g, a)| (g.clone(), a.corpus_stats())).collect();
        let global = all.corpus_stats();

        let (unigram, unigram_error) = if measures.contains(&Measure::Slor) {
            match load_unigram(section, input) {
                Ok(m) => (Some(m), None),
                Err(CliError::Input(msg)) => (None, Some(msg)),
                Err(e) => return Err(e),
            }
        } else {
            (None, None)
        };
        Ok(Self {
            measures,
            k: section.k,
            c: section.c,
            global_mean: section.global_mean,
            corpus,
            global,
            unigram,
            unigram_error,
        })
    }

    pub(crate) fn corpus_for(&self, group: Option<&str>) -> CorpusStats<f64> {
        if self.global_mean {
            return self.global;
        }
        self.corpus
            .get(&group.map(str::to_owned))
            .copied()
            .unwrap_or(CorpusStats {
                mean: None,
                token_count: 0,
            })
    }

    pub(crate) fn evaluate(&self, seq: &SurprisalSequence<f64>) -> MeasureRecord {
        let corpus = self.corpus_for(seq.group());
        let config = ReportConfig {
            measures: self.measures.clone(),
            k: self.k,
            c: self.c,
            corpus: Some(corpus),
            unigram: self.unigram.as_ref(),
        };
        let mut values = BTreeMap::new();
        let mut errors = BTreeMap::new();
        for &m in &self.measures {
            if m == Measure::Slor {
                if let Some(msg) = &self.unigram_error {
                    errors.insert(m, msg.clone());
                    continue;
                }
            }
            match measure_value(seq, m, &config) {
                Ok(v) => {
                    values.insert(m, v);
                }
                Err(e) => {
                    errors.insert(m, e.to_string());
                }
            }
        }
        MeasureRecord {
            id: seq.id().to_owned(),
            group: seq.group().map(str::to_owned),
            values,
            k: self.k,
            c: self.c,
            corpus_mean: corpus.mean,
            errors,
        }
    }
}

fn load_unigram(section: &MeasureSection, input: &Path) -> Result<UnigramModel<f64>, CliError> {
    let path = section.unigram.as_deref().unwrap_or(input);
    let reader = io::open(path)?;
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line.map_err(|e| CliError::io(path, e))?);
    }
    let is_jsonl = lines
        .iter()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('{'));
    let model = if is_jsonl {
        let token_lists: Vec<Vec<String>> = io::JsonlReader::<_, SurprisalRecord>::new(lines.join("\n").as_bytes())
            .filter_map(|(_, r)| r.ok())
            .map(|r| r.tokens)
            .collect();
        UnigramModel::build(token_lists, section.smoothing)
    } else {
        UnigramModel::from_text_lines(&lines, section.smoothing)
    };
    model.map_err(|e| CliError::Input(format!("unigram model: {e}")))
}

/// Streaming mean and variance.
#[derive(Default, Clone, Copy)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn mean(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }

    /// Sample standard deviation.
    fn std(&self) -> Option<f64> {
        (self.n > 1).then(|| (self.m2 / (self.n - 1) as f64).sqrt())
    }
}

pub fn run(ctx: &Context, input: &Path) -> Result<Summary, CliError> {
    let section = &ctx.config.measure;
    let engine = MeasureEngine::prepare(section, input)?;
    let reports_path = ctx.path(REPORTS);
    let mut reports = JsonlWriter::new(create(&reports_path)?);
    let mut errors: Vec<ErrorRecord> = Vec::new();
    let mut summary: BTreeMap<(String, Measure), Welford> = BTreeMap::new();
    let grid = section.k_grid.clone().unwrap_or_default();
    let mut sweep: BTreeMap<(String, usize), Welford> = BTreeMap::new();
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
        let seq = match rec.into_sequence() {
            Ok(s) => s,
            Err(e) => {
                errors.push(ErrorRecord {
                    line,
                    id: Some(id),
                    error: e.to_string(),
                });
                continue;
            }
        };
        let report = engine.evaluate(&seq);
        let group = label(&report.group);
        for (m, v) in &report.values {
            summary.entry((group.clone(), *m)).or_default().push(*v);
        }
        if !report.errors.is_empty() {
            let msg: Vec<String> = report.errors.iter().map(|(m, e)| format!("{m}: {e}")).collect();
            errors.push(ErrorRecord {
                line,
                id: Some(id),
                error: msg.join("; "),
            });
        }
        for (i, &k) in grid.iter().enumerate() {
            if let Ok(v) = superlinear_mean(&seq, k) {
                sweep.entry((group.clone(), i)).or_default().push(v);
            }
        }
        reports.write(&report).map_err(|e| CliError::io(&reports_path, e))?;
    }
    reports.finish().map_err(|e| CliError::io(&reports_path, e))?;

    let summary_path = ctx.path(SUMMARY);
    let rows: Vec<SummaryRow> = summary
        .iter()
        .map(|((group, measure), w)| SummaryRow {
            group: group.clone(),
            measure: *measure,
            count: w.n,
            mean: w.mean(),
            std: w.std(),
        })
        .collect();
    io::write_summary_csv(create(&summary_path)?, &rows).map_err(|e| CliError::io(&summary_path, e.into()))?;

    let errors_path = ctx.path(ERRORS);
    write_errors(&errors_path, &errors)?;
    let mut outputs = vec![reports_path, summary_path, errors_path];

    if !grid.is_empty() {
        let sweep_path = ctx.path(K_SWEEP);
        let mut w = csv::Writer::from_writer(create(&sweep_path)?);
        let write = |w: &mut csv::Writer<_>| -> csv::Result<()> {
            w.write_record(["k", "group", "count", "mean_sl"])?;
            let mut keys: Vec<&(String, usize)> = sweep.keys().collect();
            keys.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            for key in keys {
                let acc = sweep[key];
                w.write_record([
                    grid[key.1].to_string(),
                    key.0.clone(),
                    acc.n.to_string(),
                    io::csv_cell(acc.mean()),
                ])?;
            }
            w.flush()?;
            Ok(())
        };
        write(&mut w).map_err(|e| CliError::io(&sweep_path, e.into()))?;
        outputs.push(sweep_path);
    }

    Ok(Summary {
        command: "measure",
        records,
        errors: errors.len(),
        outputs,
    })
}

/// Fetches surprisals for each non-empty line of a plain-text file from an
/// HTTP endpoint and writes them as surprisal JSONL with line-number ids.
pub fn fetch_input(endpoint: &str, texts: &Path, out_dir: &Path, options: &HttpOptions) -> Result<PathBuf, CliError> {
    let reader = io::open(texts)?;
    let mut ids = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(texts, e))?;
        if !line.trim().is_empty() {
            ids.push((i + 1).to_string());
            lines.push(line);
        }
    }
    let path = out_dir.join(FETCHED);
    let mut out = create(&path)?;
    for (chunk_ids, chunk) in ids.chunks(64).zip(lines.chunks(64)) {
        let seqs = fetch_surprisals(endpoint, chunk, options).map_err(|source| CliError::Scorer {
            id: endpoint.to_owned(),
            source,
        })?;
        for (id, seq) in chunk_ids.iter().zip(seqs) {
            let mut rec = SurprisalRecord::from_sequence(&seq);
            rec.id = id.clone();
            serde_json::to_writer(&mut out, &rec).map_err(|e| CliError::io(&path, e.into()))?;
            out.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
        }
    }
    out.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
