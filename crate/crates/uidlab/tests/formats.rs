use std::collections::BTreeMap;

use proptest::prelude::*;

use uidlab::io::{self, CorrelationTable, JsonlReader, JsonlWriter, MeasureRecord, SummaryRow, SurprisalRecord, ThresholdRow};
use uidlab::scorer::{Handshake, ScoreRequest, ScoreResponse};
use uidlab_core::measures::Measure;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, Just(0.0), Just(-0.0), Just(1e-300), Just(f64::MAX)]
}

fn cell() -> impl Strategy<Value = Option<f64>> {
    prop::option::of(finite())
}

fn measure() -> impl Strategy<Value = Measure> {
    prop::sample::select(Measure::ALL.to_vec())
}

fn word() -> impl Strategy<Value = String> {
    "[a-zé漢ü'.,-]{1,8}"
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #[test]
    fn protocol_messages_round_trip(
        id in any::<u64>(),
        hyp in any::<String>(),
        src in prop::option::of(any::<String>()),
        reference in prop::option::of(any::<String>()),
        score in finite(),
        error in any::<String>(),
    ) {
        let req = ScoreRequest { id, hyp, src, reference };
        let line = serde_json::to_string(&req).unwrap();
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(serde_json::from_str::<ScoreRequest>(&line).unwrap(), req);

        for resp in [ScoreResponse::Score { id, score }, ScoreResponse::Error { id, error: error.clone() }] {
            let line = serde_json::to_string(&resp).unwrap();
            let back: ScoreResponse = serde_json::from_str(&line).unwrap();
            prop_assert_eq!(back.id(), id);
            prop_assert_eq!(back, resp);
        }
    }

    #[test]
    fn handshake_round_trips(name in any::<String>(), s in any::<bool>(), r in any::<bool>(), batch in 1usize..1000) {
        let h = Handshake { protocol: "scorer/1".into(), name, needs_source: s, needs_reference: r, batch };
        let back: Handshake = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn jsonl_records_round_trip(
        rows in prop::collection::vec(
            (prop::collection::vec((word(), 0.0f64..30.0), 1..10), prop::option::of(word()), prop::collection::btree_map(measure(), finite(), 0..8)),
            0..10,
        ),
    ) {
        let surprisals: Vec<SurprisalRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, (toks, group, _))| SurprisalRecord {
                id: format!("r{i}"),
                tokens: toks.iter().map(|t| t.0.clone()).collect(),
                surprisals: toks.iter().map(|t| t.1).collect(),
                group: group.clone(),
            })
            .collect();
        let measures: Vec<MeasureRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, (_, group, values))| MeasureRecord {
                id: format!("r{i}"),
                group: group.clone(),
                values: values.clone(),
                k: 2.0,
                c: 0.0,
                corpus_mean: values.values().next().copied(),
                errors: BTreeMap::new(),
            })
            .collect();

        let mut w = JsonlWriter::new(Vec::new());
        for r in &surprisals {
            w.write(r).unwrap();
        }
        let bytes = w.finish().unwrap();
        let back: Vec<SurprisalRecord> = JsonlReader::new(&bytes[..]).map(|(_, r)| r.unwrap()).collect();
        prop_assert_eq!(&back, &surprisals);
        for r in back {
            let seq = r.clone().into_sequence().unwrap();
            prop_assert_eq!(SurprisalRecord::from_sequence(&seq), r);
        }

        let mut w = JsonlWriter::new(Vec::new());
        for r in &measures {
            w.write(r).unwrap();
        }
        let bytes = w.finish().unwrap();
        let back: Vec<MeasureRecord> = JsonlReader::new(&bytes[..]).map(|(_, r)| r.unwrap()).collect();
        prop_assert_eq!(back, measures);
    }

    #[test]
    fn correlation_csv_round_trips(
        columns in prop::collection::btree_set("[a-z]{1,4}~[a-z]{1,4}", 1..4),
        rows in prop::collection::btree_map(measure(), prop::collection::vec(cell(), 3), 1..8),
    ) {
        let columns: Vec<String> = columns.into_iter().collect();
        let table = CorrelationTable {
            rows: rows.into_iter().map(|(m, v)| (m, v[..columns.len().min(3)].to_vec())).collect(),
            columns: columns.into_iter().take(3).collect(),
        };
        let mut buf = Vec::new();
        table.write(&mut buf).unwrap();
        let back = CorrelationTable::read(&buf[..]).unwrap();
        prop_assert_eq!(&back.columns, &table.columns);
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for ((m1, v1), (m2, v2)) in back.rows.iter().zip(&table.rows) {
            prop_assert_eq!(m1, m2);
            prop_assert!(v1.iter().zip(v2).all(|(a, b)| same(*a, *b)));
        }
    }

    #[test]
    fn threshold_and_summary_csv_round_trip(
        m in measure(),
        rows in prop::collection::vec((finite(), "[a-z]{1,5}", 0usize..1000, cell(), cell()), 0..20),
    ) {
        let thresholds: Vec<ThresholdRow> = rows
            .iter()
            .map(|(t, g, n, mean, _)| ThresholdRow { threshold: *t, group: g.clone(), count: *n, mean: *mean })
            .collect();
        let mut buf = Vec::new();
        io::write_threshold_csv(&mut buf, m, &thresholds).unwrap();
        let (m2, back) = io::read_threshold_csv(&buf[..]).unwrap();
        prop_assert_eq!(m2, m);
        prop_assert_eq!(back.len(), thresholds.len());
        for (a, b) in back.iter().zip(&thresholds) {
            prop_assert!(a.threshold == b.threshold && a.group == b.group && a.count == b.count && same(a.mean, b.mean));
        }

        let summary: Vec<SummaryRow> = rows
            .iter()
            .map(|(_, g, n, mean, std)| SummaryRow { group: g.clone(), measure: m, count: *n, mean: *mean, std: *std })
            .collect();
        let mut buf = Vec::new();
        io::write_summary_csv(&mut buf, &summary).unwrap();
        let back = io::read_summary_csv(&buf[..]).unwrap();
        prop_assert_eq!(back.len(), summary.len());
        for (a, b) in back.iter().zip(&summary) {
            prop_assert!(a.group == b.group && a.measure == b.measure && a.count == b.count);
            prop_assert!(same(a.mean, b.mean) && same(a.std, b.std));
        }
    }

    #[test]
    fn dictionary_and_wordlist_round_trip(
        dict in prop::collection::btree_map(word(), prop::collection::btree_set(word(), 1..4), 0..10),
        words in prop::collection::btree_set(word(), 0..20),
    ) {
        // Targets are deduplicated on parse, so generate distinct ones.
        let dict: BTreeMap<String, Vec<String>> = dict.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
        let mut buf = Vec::new();
        io::write_dictionary(&mut buf, &dict).unwrap();
        prop_assert_eq!(io::parse_dictionary(&buf[..]).unwrap(), dict);
        let mut buf = Vec::new();
        io::write_wordlist(&mut buf, &words).unwrap();
        prop_assert_eq!(io::parse_wordlist(&buf[..]).unwrap(), words);
    }
}

#[test]
fn csv_cells_use_na() {
    assert_eq!(io::csv_cell(None), "NA");
    assert_eq!(io::parse_csv_cell("NA").unwrap(), None);
    assert_eq!(io::parse_csv_cell(&io::csv_cell(Some(0.1))).unwrap(), Some(0.1));
    assert!(io::parse_csv_cell("abc").is_err());
}
