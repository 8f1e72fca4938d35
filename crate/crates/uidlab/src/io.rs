//! Record formats read and written by the CLI, with streaming JSONL helpers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uidlab_core::ga::GenerationStats;
use uidlab_core::measures::{Measure, MeasureError, SurprisalSequence};

use crate::error::{CliError, ParseError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurprisalRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub surprisals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl SurprisalRecord {
    pub fn into_sequence(self) -> Result<SurprisalSequence<f64>, MeasureError> {
        SurprisalSequence::new(self.id, self.tokens, self.surprisals, self.group)
    }

    pub fn from_sequence(seq: &SurprisalSequence<f64>) -> Self {
        Self {
            id: seq.id().to_owned(),
            tokens: seq.tokens().to_vec(),
            surprisals: seq.surprisals().to_vec(),
            group: seq.group().map(str::to_owned),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityRecord {
    pub id: String,
    pub system: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatesRecord {
    pub id: String,
    pub source: String,
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<Vec<String>>,
}

/// Per-sequence output of `measure`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub values: BTreeMap<Measure, f64>,
    pub k: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub errors: BTreeMap<Measure, String>,
}

/// A record that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorRecord {
    pub line: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankedCandidate {
    pub index: usize,
    pub candidate: String,
    pub utility: f64,
}

/// Per-example output of `mbr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MbrRecord {
    pub id: String,
    pub best: String,
    pub ranking: Vec<RankedCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEntry {
    pub gen: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
}

impl From<&GenerationStats> for TraceEntry {
    fn from(g: &GenerationStats) -> Self {
        Self {
            gen: g.generation,
            best: g.best,
            mean: g.mean,
            best_ever: g.best_ever,
        }
    }
}

/// Per-example output of `ga`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub id: String,
    pub best: String,
    pub fitness: f64,
    pub trace: Vec<TraceEntry>,
}

/// One adversarial example: the initial translation, the evolved one, the
/// reference, and their optimized-metric scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialRecord {
    pub id: String,
    pub mt: String,
    pub post_ga: String,
    #[serde(rename = "ref")]
    pub reference: Option<String>,
    pub mt_score: f64,
    pub ga_score: f64,
}

/// Held-out scores of the GA output and both baselines for one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeldOutRecord {
    pub id: String,
    pub ga: f64,
    pub logprob: f64,
    pub mbr: f64,
}

/// One InfoNCE batch with its bilinear weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoNceRecord {
    pub d: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub context: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// An `infonce-check` input file holds one batch or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InfoNceFile {
    One(InfoNceRecord),
    Many(Vec<InfoNceRecord>),
}

impl InfoNceFile {
    pub fn into_batches(self) -> Vec<InfoNceRecord> {
        match self {
            InfoNceFile::One(b) => vec![b],
            InfoNceFile::Many(v) => v,
        }
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Streams `(line number, record)` pairs from a JSONL source, skipping blank
/// lines. Malformed lines yield a [`ParseError`] and do not stop iteration.
pub struct JsonlReader<R, T> {
    lines: io::Lines<R>,
    line: usize,
    _record: PhantomData<T>,
}

impl<R: BufRead, T: DeserializeOwned> JsonlReader<R, T> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line: 0,
            _record: PhantomData,
        }
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonlReader<R, T> {
    type Item = (usize, Result<T, ParseError>);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = self.lines.next()?;
            self.line += 1;
            let line = self.line;
            let text = match text {
                Ok(t) => t,
                Err(e) => {
                    return Some((
                        line,
                        Err(ParseError {
                            line,
                            message: e.to_string(),
                        }),
                    ))
                }
            };
            if text.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str(&text).map_err(|e| ParseError {
                line,
                message: e.to_string(),
            });
            return Some((line, parsed));
        }
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<JsonlReader<BufReader<File>, T>, CliError> {
    Ok(JsonlReader::new(open(path)?))
}

/// Reads every record, failing on the first malformed line.
pub fn read_jsonl_strict<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    read_jsonl(path)?
        .map(|(_, r)| r.map_err(|e| CliError::Parse { path: path.to_owned(), source: e }))
        .collect()
}

pub struct JsonlWriter<W: Write> {
    out: W,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let mut w = JsonlWriter::new(create(path)?);
    for r in records {
        w.write(r).map_err(|e| CliError::io(path, e))?;
    }
    w.finish().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(path, e.into()))?;
    out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

/// Parses a bilingual dictionary: `source<TAB>target[<TAB>target...]`.
/// Repeated source words accumulate their targets.
pub fn parse_dictionary<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<String>>, ParseError> {
    let mut dict: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let source = fields.next().unwrap_or_default().trim();
        let targets: Vec<String> = fields.map(str::trim).filter(|t| !t.is_empty()).map(str::to_owned).collect();
        if source.is_empty() || targets.is_empty() {
            return Err(ParseError {
                line: line_no,
                message: "expected source<TAB>target[<TAB>target...]".into(),
            });
        }
        let entry = dict.entry(source.to_owned()).or_default();
        for t in targets {
            if !entry.contains(&t) {
                entry.push(t);
            }
        }
    }
    Ok(dict)
}

pub fn write_dictionary<W: Write>(mut out: W, dict: &BTreeMap<String, Vec<String>>) -> io::Result<()> {
    for (source, targets) in dict {
        writeln!(out, "{}\t{}", source, targets.join("\t"))?;
    }
    out.flush()
}

/// One token per line; blank lines are skipped.
pub fn parse_wordlist<R: BufRead>(reader: R) -> io::Result<BTreeSet<String>> {
    let mut words = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() {
            words.insert(w.to_owned());
        }
    }
    Ok(words)
}

pub fn write_wordlist<W: Write>(mut out: W, words: &BTreeSet<String>) -> io::Result<()> {
    for w in words {
        writeln!(out, "{w}")?;
    }
    out.flush()
}

/// Formats a float for CSV output, `NA` when absent.
pub fn csv_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| x.to_string())
}

pub fn parse_csv_cell(cell: &str) -> Result<Option<f64>, std::num::ParseFloatError> {
    if cell == "NA" {
        Ok(None)
    } else {
        cell.parse().map(Some)
    }
}

/// Measure-by-group-pair Pearson correlations. `None` marks an undefined
/// correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub columns: Vec<String>,
    pub rows: Vec<(Measure, Vec<Option<f64>>)>,
}

impl CorrelationTable {
    pub fn get(&self, measure: Measure, column: &str) -> Option<Option<f64>> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.iter().find(|(m, _)| *m == measure).map(|(_, r)| r[c])
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["measure".to_owned()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (m, cells) in &self.rows {
            let mut row = vec![m.name().to_owned()];
            row.extend(cells.iter().map(|c| csv_cell(*c)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: io::Read>(input: R) -> Result<Self, String> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| e.to_string())?.clone();
        if header.get(0) != Some("measure") {
            return Err("first column must be 'measure'".into());
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let measure: Measure = rec.get(0).unwrap_or_default().parse().map_err(|e: uidlab_core::measures::UnknownMeasure| e.to_string())?;
            let cells = rec
                .iter()
                .skip(1)
                .map(|c| parse_csv_cell(c).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((measure, cells));
        }
        Ok(Self { columns, rows })
    }
}

/// One row of a threshold-curve CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub group: String,
    pub count: usize,
    pub mean: Option<f64>,
}

pub fn write_threshold_csv<W: Write>(out: W, measure: Measure, rows: &[ThresholdRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "group", "count", &format!("mean_{}", measure.name())])?;
    for r in rows {
        w.write_record([r.threshold.to_string(), r.group.clone(), r.count.to_string(), csv_cell(r.mean)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_threshold_csv<R: io::Read>(input: R) -> Result<(Measure, Vec<ThresholdRow>), String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    let name = header
        .get(3)
        .and_then(|h| h.strip_prefix("mean_"))
        .ok_or("fourth column must be mean_<measure>")?;
    let measure: Measure = name.parse().map_err(|e: uidlab_core::measures::UnknownMeasure| e.to_string())?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        rows.push(ThresholdRow {
            threshold: field(0).parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
            group: field(1).to_owned(),
            count: field(2).parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            mean: parse_csv_cell(field(3)).map_err(|e| e.to_string())?,
        });
    }
    Ok((measure, rows))
}

/// One row of the per-group measure summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: String,
    pub measure: Measure,
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "measure", "count", "mean", "std"])?;
    for r in rows {
        w.write_record([
            r.group.clone(),
            r.measure.name().to_owned(),
            r.count.to_string(),
            csv_cell(r.mean),
            csv_cell(r.std),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: io::Read>(input: R) -> Result<Vec<SummaryRow>, String> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        rows.push(SummaryRow {
            group: field(0).to_owned(),
            measure: field(1).parse().map_err(|e: uidlab_core::measures::UnknownMeasure| e.to_string())?,
            count: field(2).parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            mean: parse_csv_cell(field(3)).map_err(|e| e.to_string())?,
            std: parse_csv_cell(field(4)).map_err(|e| e.to_string())?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_reader_reports_line_numbers() {
        let input = "{\"id\":\"a\",\"system\":\"s\",\"score\":0.5}\n\nnot json\n{\"id\":\"b\",\"system\":\"s\",\"score\":1}\n";
        let items: Vec<(usize, Result<QualityRecord, ParseError>)> = JsonlReader::new(input.as_bytes()).collect();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0].0, 1);
        assert!(matches!(&items[1], (3, Err(ParseError { line: 3, .. }))));
        assert_eq!(items[2].1.as_ref().unwrap().id, "b");
    }

    #[test]
    fn dictionary_round_trip() {
        let text = "dům\thouse\thome\nkočka\tcat\ndům\tbuilding\n";
        let dict = parse_dictionary(text.as_bytes()).unwrap();
        assert_eq!(dict["dům"], ["house", "home", "building"]);
        let mut out = Vec::new();
        write_dictionary(&mut out, &dict).unwrap();
        assert_eq!(parse_dictionary(out.as_slice()).unwrap(), dict);
        assert_eq!(parse_dictionary("lonely\n".as_bytes()).unwrap_err().line, 1);
    }

    #[test]
    fn wordlist_round_trip() {
        let words = parse_wordlist("b\n\n a \nb\n".as_bytes()).unwrap();
        assert_eq!(words.iter().collect::<Vec<_>>(), ["a", "b"]);
        let mut out = Vec::new();
        write_wordlist(&mut out, &words).unwrap();
        assert_eq!(parse_wordlist(out.as_slice()).unwrap(), words);
    }

    #[test]
    fn csv_round_trips() {
        let table = CorrelationTable {
            columns: vec!["a~b".into(), "a~c".into()],
            rows: vec![(Measure::Lv, vec![Some(1.0), None]), (Measure::Gini, vec![Some(-0.25), Some(0.5)])],
        };
        let mut out = Vec::new();
        table.write(&mut out).unwrap();
        assert!(String::from_utf8_lossy(&out).starts_with("measure,a~b,a~c\nlv,1,NA\n"));
        assert_eq!(CorrelationTable::read(out.as_slice()).unwrap(), table);

        let rows = vec![
            ThresholdRow { threshold: 0.5, group: "mt".into(), count: 2, mean: Some(1.25) },
            ThresholdRow { threshold: 0.9, group: "mt".into(), count: 0, mean: None },
        ];
        let mut out = Vec::new();
        write_threshold_csv(&mut out, Measure::Cv, &rows).unwrap();
        assert!(String::from_utf8_lossy(&out).starts_with("threshold,group,count,mean_cv\n"));
        assert_eq!(read_threshold_csv(out.as_slice()).unwrap(), (Measure::Cv, rows));
    }

    #[test]
    fn infonce_file_accepts_one_or_many() {
        let one = r#"{"d":1,"W":[[1.0]],"context":[1.0],"positive":[1.0],"negatives":[[0.0]]}"#;
        let f: InfoNceFile = serde_json::from_str(one).unwrap();
        assert_eq!(f.into_batches().len(), 1);
        let many = format!("[{one},{one}]");
        let f: InfoNceFile = serde_json::from_str(&many).unwrap();
        assert_eq!(f.into_batches().len(), 2);
    }
}
