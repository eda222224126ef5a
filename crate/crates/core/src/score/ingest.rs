use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Order, Quartet, QuartetKey, Role, ScoreRecord, ScoreTable};
use crate::template::{ExampleId, ExampleIdError, Polarity, ProbeExample};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: cannot parse record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    BadExampleId {
        line: usize,
        #[source]
        source: ExampleIdError,
    },
    #[error("line {line}: example {id:?} is not in the dataset")]
    UnknownExample { line: usize, id: String },
    #[error("line {line}: example {id:?} appears again with different scores")]
    ConflictingDuplicate { line: usize, id: String },
    #[error("line {line}: model {found:?} differs from {expected:?} seen earlier")]
    MixedModels {
        line: usize,
        expected: String,
        found: String,
    },
}

/// Summary of one ingest run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_total: u64,
    pub quartets_complete: u64,
    /// Quartets missing at least one of their four examples; excluded.
    pub partial_quartets_quarantined: u64,
    /// Records with a score outside [0, 1] (or NaN); dropped.
    pub out_of_range_rejected: u64,
    /// Records whose two scores sum above 1. Kept; masked-LM scores may do so.
    pub sum_violations: u64,
    /// Exact repeats of an earlier record; ignored.
    pub duplicate_records: u64,
}

impl IngestReport {
    pub fn has_rejections(&self) -> bool {
        self.out_of_range_rejected > 0 || self.partial_quartets_quarantined > 0
    }
}

/// Example ids of a generated dataset, used to validate score-file joins.
#[derive(Debug, Clone, Default)]
pub struct DatasetIndex {
    pub descriptor: String,
    ids: HashSet<String>,
}

impl DatasetIndex {
    pub fn from_examples<'a>(
        descriptor: impl Into<String>,
        examples: impl IntoIterator<Item = &'a ProbeExample>,
    ) -> Self {
        DatasetIndex {
            descriptor: descriptor.into(),
            ids: examples.into_iter().map(|e| e.example_id.clone()).collect(),
        }
    }

    /// Reads a JSON-lines dataset, keeping only the example ids.
    pub fn read_jsonl<R: BufRead>(
        descriptor: impl Into<String>,
        reader: R,
    ) -> Result<Self, IngestError> {
        #[derive(Deserialize)]
        struct IdOnly {
            example_id: String,
        }
        let mut ids = HashSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: IdOnly = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            ids.insert(rec.example_id);
        }
        Ok(DatasetIndex {
            descriptor: descriptor.into(),
            ids,
        })
    }

    pub fn contains(&self, example_id: &str) -> bool {
        self.ids.contains(example_id)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

type Slots = [Option<(f64, f64)>; 4];

fn slot_index(order: Order, polarity: Polarity) -> usize {
    match (order, polarity) {
        (Order::FirstSecond, Polarity::Positive) => 0,
        (Order::SecondFirst, Polarity::Positive) => 1,
        (Order::FirstSecond, Polarity::Negated) => 2,
        (Order::SecondFirst, Polarity::Negated) => 3,
    }
}

struct Assembler<'d> {
    index: Option<&'d DatasetIndex>,
    model_id: Option<String>,
    partial: HashMap<QuartetKey, Slots>,
    report: IngestReport,
}

impl<'d> Assembler<'d> {
    fn new(index: Option<&'d DatasetIndex>) -> Self {
        Assembler {
            index,
            model_id: None,
            partial: HashMap::new(),
            report: IngestReport::default(),
        }
    }

    fn push(&mut self, line: usize, record: ScoreRecord) -> Result<(), IngestError> {
        self.report.records_total += 1;
        let id: ExampleId = record
            .example_id
            .parse()
            .map_err(|source| IngestError::BadExampleId { line, source })?;
        if let Some(index) = self.index {
            if !index.contains(&record.example_id) {
                return Err(IngestError::UnknownExample {
                    line,
                    id: record.example_id,
                });
            }
        }
        match &self.model_id {
            None => self.model_id = Some(record.model_id.clone()),
            Some(m) if *m != record.model_id => {
                return Err(IngestError::MixedModels {
                    line,
                    expected: m.clone(),
                    found: record.model_id,
                })
            }
            Some(_) => {}
        }
        let in_range = |s: f64| (0.0..=1.0).contains(&s);
        if !in_range(record.score_subject1) || !in_range(record.score_subject2) {
            self.report.out_of_range_rejected += 1;
            return Ok(());
        }
        if record.score_subject1 + record.score_subject2 > 1.0 {
            self.report.sum_violations += 1;
        }

        let (key, order) = QuartetKey::locate(&id);
        // Stored as (first, second) regardless of mention order.
        let pair = match order.leading() {
            Role::First => (record.score_subject1, record.score_subject2),
            Role::Second => (record.score_subject2, record.score_subject1),
        };
        let slot = &mut self.partial.entry(key).or_default()[slot_index(order, id.polarity)];
        match slot {
            Some(existing) if *existing == pair => self.report.duplicate_records += 1,
            Some(_) => {
                return Err(IngestError::ConflictingDuplicate {
                    line,
                    id: record.example_id,
                })
            }
            None => *slot = Some(pair),
        }
        Ok(())
    }

    fn finish<T: Scalar>(mut self) -> (ScoreTable<T>, IngestReport) {
        let mut table = ScoreTable::new(self.model_id.unwrap_or_default());
        table.dataset = self.index.map(|i| i.descriptor.clone());
        for (key, slots) in self.partial {
            if slots.iter().any(Option::is_none) {
                self.report.partial_quartets_quarantined += 1;
                continue;
            }
            let quartet = Quartet::from_fn(key, |role, order, polarity| {
                let (first, second) = slots[slot_index(order, polarity)].unwrap();
                T::from_f64_lossy(match role {
                    Role::First => first,
                    Role::Second => second,
                })
            });
            table
                .insert(quartet)
                .expect("assembled quartets are canonical, in range and unique");
            self.report.quartets_complete += 1;
        }
        (table, self.report)
    }
}

/// Reads a line-delimited score file and assembles complete quartets.
///
/// When `index` is given every example id must belong to that dataset;
/// otherwise ids are only checked against the canonical grammar.
pub fn ingest<T: Scalar, R: BufRead>(
    reader: R,
    index: Option<&DatasetIndex>,
) -> Result<(ScoreTable<T>, IngestReport), IngestError> {
    let mut asm = Assembler::new(index);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoreRecord = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        asm.push(i + 1, record)?;
    }
    Ok(asm.finish())
}

/// [`ingest`] over in-memory records; `line` in errors is the 1-based
/// position in the iterator.
pub fn ingest_records<T: Scalar>(
    records: impl IntoIterator<Item = ScoreRecord>,
    index: Option<&DatasetIndex>,
) -> Result<(ScoreTable<T>, IngestReport), IngestError> {
    let mut asm = Assembler::new(index);
    for (i, record) in records.into_iter().enumerate() {
        asm.push(i + 1, record)?;
    }
    Ok(asm.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::Polarity;

    fn rec(id: &str, s1: f64, s2: f64) -> ScoreRecord {
        ScoreRecord {
            example_id: id.into(),
            score_subject1: s1,
            score_subject2: s2,
            model_id: "m".into(),
        }
    }

    fn worked_example() -> Vec<ScoreRecord> {
        vec![
            rec("t:same-city|s1:gerald|s2:jennifer|a:hunter|pos", 0.26, 0.73),
            rec("t:same-city|s1:jennifer|s2:gerald|a:hunter|pos", 0.45, 0.54),
            rec("t:same-city|s1:gerald|s2:jennifer|a:hunter|neg", 0.35, 0.62),
            rec("t:same-city|s1:jennifer|s2:gerald|a:hunter|neg", 0.86, 0.12),
        ]
    }

    #[test]
    fn complete_quartet_assembled() {
        let (table, report) = ingest_records::<f64>(worked_example(), None).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(report.quartets_complete, 1);
        assert_eq!(report.partial_quartets_quarantined, 0);
        let q = table.quartets().next().unwrap();
        assert_eq!(
            q.score(Role::First, Order::SecondFirst, Polarity::Positive),
            0.54
        );
        assert_eq!(
            q.score(Role::Second, Order::SecondFirst, Polarity::Negated),
            0.86
        );
    }

    #[test]
    fn partial_quartet_quarantined() {
        let mut recs = worked_example();
        recs.pop();
        let (table, report) = ingest_records::<f64>(recs, None).unwrap();
        assert!(table.is_empty());
        assert_eq!(report.partial_quartets_quarantined, 1);
        assert!(report.has_rejections());
    }

    #[test]
    fn out_of_range_rejected_and_sum_flagged() {
        let mut recs = worked_example();
        recs[0].score_subject1 = 1.2;
        recs[1].score_subject1 = 0.9;
        let (table, report) = ingest_records::<f64>(recs, None).unwrap();
        assert_eq!(report.out_of_range_rejected, 1);
        assert_eq!(report.sum_violations, 1);
        assert!(table.is_empty());
    }

    #[test]
    fn duplicates() {
        let mut recs = worked_example();
        recs.push(recs[0].clone());
        let (_, report) = ingest_records::<f64>(recs.clone(), None).unwrap();
        assert_eq!(report.duplicate_records, 1);

        recs.last_mut().unwrap().score_subject1 = 0.3;
        let err = ingest_records::<f64>(recs, None).unwrap_err();
        assert!(matches!(
            err,
            IngestError::ConflictingDuplicate { line: 5, .. }
        ));
    }

    #[test]
    fn unknown_example_and_bad_lines() {
        let index = DatasetIndex::from_examples("d", []);
        let err = ingest_records::<f64>(worked_example(), Some(&index)).unwrap_err();
        assert!(matches!(err, IngestError::UnknownExample { line: 1, .. }));

        let text = "{\"example_id\": \"t:a|s1:x|s2:y|a:b|pos\", \"score_subject1\": 0.1, \"score_subject2\": 0.2, \"model_id\": \"m\"}\nnot json\n";
        let err = ingest::<f64, _>(text.as_bytes(), None).unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 2, .. }), "{err}");

        let text = "{\"example_id\": \"nope\", \"score_subject1\": 0.1, \"score_subject2\": 0.2, \"model_id\": \"m\"}\n";
        assert!(matches!(
            ingest::<f64, _>(text.as_bytes(), None),
            Err(IngestError::BadExampleId { line: 1, .. })
        ));
    }

    #[test]
    fn mixed_models_rejected() {
        let mut recs = worked_example();
        recs[2].model_id = "other".into();
        assert!(matches!(
            ingest_records::<f64>(recs, None),
            Err(IngestError::MixedModels { line: 3, .. })
        ));
    }

    #[test]
    fn export_reingest_round_trip() {
        let (table, _) = ingest_records::<f64>(worked_example(), None).unwrap();
        let mut buf = Vec::new();
        table.write_scores(&mut buf).unwrap();
        let (again, report) = ingest::<f64, _>(buf.as_slice(), None).unwrap();
        assert_eq!(again, table);
        assert!(!report.has_rejections());
    }
}
