use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Order, Quartet, QuartetKey, Role};
use crate::template::Polarity;
use crate::Scalar;

/// One line of a score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub example_id: String,
    /// Score of the subject mentioned first.
    pub score_subject1: f64,
    pub score_subject2: f64,
    pub model_id: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("score table is empty")]
pub struct EmptyTable;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("quartet key {0:?} is not canonical")]
    NonCanonicalKey(QuartetKey),
    #[error("quartet {0:?} has a score outside [0, 1]")]
    OutOfRange(QuartetKey),
    #[error("duplicate quartet {0:?}")]
    Duplicate(QuartetKey),
}

/// Complete quartets of one model, keyed and ordered by [`QuartetKey`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable<T> {
    pub model_id: String,
    /// Which probe dataset produced the scores, when known.
    pub dataset: Option<String>,
    quartets: BTreeMap<QuartetKey, Quartet<T>>,
}

impl<T: Scalar> ScoreTable<T> {
    pub fn new(model_id: impl Into<String>) -> Self {
        ScoreTable {
            model_id: model_id.into(),
            dataset: None,
            quartets: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, quartet: Quartet<T>) -> Result<(), TableError> {
        if !quartet.key.is_canonical() {
            return Err(TableError::NonCanonicalKey(quartet.key));
        }
        if !quartet.all_in_unit_range() {
            return Err(TableError::OutOfRange(quartet.key));
        }
        if self.quartets.contains_key(&quartet.key) {
            return Err(TableError::Duplicate(quartet.key));
        }
        self.quartets.insert(quartet.key.clone(), quartet);
        Ok(())
    }

    /// Replaces a quartet's scores without range checks. Meant for fault
    /// injection in tests of [`check_properties`](crate::metrics::check_properties).
    pub fn get_mut(&mut self, key: &QuartetKey) -> Option<&mut Quartet<T>> {
        self.quartets.get_mut(key)
    }

    pub fn get(&self, key: &QuartetKey) -> Option<&Quartet<T>> {
        self.quartets.get(key)
    }

    pub fn len(&self) -> usize {
        self.quartets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quartets.is_empty()
    }

    pub fn quartets(&self) -> impl ExactSizeIterator<Item = &Quartet<T>> + Clone {
        self.quartets.values()
    }

    pub fn subjects(&self) -> BTreeSet<&str> {
        self.quartets
            .keys()
            .flat_map(|k| [k.first.as_str(), k.second.as_str()])
            .collect()
    }

    pub fn attributes(&self) -> BTreeSet<&str> {
        self.quartets
            .keys()
            .map(|k| k.attribute_id.as_str())
            .collect()
    }

    pub fn templates(&self) -> BTreeSet<&str> {
        self.quartets
            .keys()
            .map(|k| k.template_id.as_str())
            .collect()
    }

    /// Four score records per quartet, in key order.
    pub fn to_records(&self) -> Vec<ScoreRecord> {
        let mut out = Vec::with_capacity(self.quartets.len() * 4);
        for q in self.quartets.values() {
            for order in Order::ALL {
                for polarity in [Polarity::Negated, Polarity::Positive] {
                    let lead = order.leading();
                    out.push(ScoreRecord {
                        example_id: q.key.example_id(order, polarity).to_string(),
                        score_subject1: q.score(lead, order, polarity).to_f64_lossy(),
                        score_subject2: q.score(lead.other(), order, polarity).to_f64_lossy(),
                        model_id: self.model_id.clone(),
                    });
                }
            }
        }
        out
    }

    /// Writes the table in the line-delimited score-file format.
    pub fn write_scores<W: Write>(&self, mut out: W) -> io::Result<()> {
        for record in self.to_records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

/// Mean over every example of the average of its two subject scores.
pub fn avg_answer_prob<T: Scalar>(table: &ScoreTable<T>) -> Result<T, EmptyTable> {
    let per_example = table.quartets().flat_map(|q| {
        Order::ALL.into_iter().flat_map(move |order| {
            Polarity::ALL.into_iter().map(move |polarity| {
                T::half()
                    * (q.score(Role::First, order, polarity)
                        + q.score(Role::Second, order, polarity))
            })
        })
    });
    crate::scalar::mean(per_example).ok_or(EmptyTable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn key(a: &str, b: &str) -> QuartetKey {
        QuartetKey::canonical("t", a, b, "x")
    }

    fn constant(k: QuartetKey, v: f64) -> Quartet<f64> {
        Quartet::from_fn(k, |_, _, _| v)
    }

    #[test]
    fn avg_answer_prob_examples() {
        let mut t = ScoreTable::new("m");
        t.insert(constant(key("a", "b"), 0.5)).unwrap();
        t.insert(constant(key("a", "c"), 0.5)).unwrap();
        assert_eq!(avg_answer_prob(&t).unwrap(), 0.5);

        let mut t = ScoreTable::new("m");
        t.insert(constant(key("a", "b"), 0.0)).unwrap();
        assert_eq!(avg_answer_prob(&t).unwrap(), 0.0);

        let mut t = ScoreTable::new("m");
        t.insert(Quartet::from_pairs(
            key("gerald", "jennifer"),
            [0.26, 0.73],
            [0.54, 0.45],
            [0.35, 0.62],
            [0.12, 0.86],
        ))
        .unwrap();
        // Pair means 0.495, 0.495, 0.485, 0.49.
        assert_abs_diff_eq!(avg_answer_prob(&t).unwrap(), 0.49125, epsilon = 1e-12);

        assert_eq!(
            avg_answer_prob(&ScoreTable::<f64>::new("m")),
            Err(EmptyTable)
        );
    }

    #[test]
    fn insert_validates() {
        let mut t = ScoreTable::new("m");
        let mut bad_key = key("a", "b");
        std::mem::swap(&mut bad_key.first, &mut bad_key.second);
        assert!(matches!(
            t.insert(constant(bad_key, 0.5)),
            Err(TableError::NonCanonicalKey(_))
        ));
        assert!(matches!(
            t.insert(constant(key("a", "b"), 1.5)),
            Err(TableError::OutOfRange(_))
        ));
        t.insert(constant(key("a", "b"), 0.5)).unwrap();
        assert!(matches!(
            t.insert(constant(key("a", "b"), 0.5)),
            Err(TableError::Duplicate(_))
        ));
    }

    #[test]
    fn records_carry_mention_order_scores() {
        let mut t = ScoreTable::new("m");
        t.insert(Quartet::from_pairs(
            key("gerald", "jennifer"),
            [0.26, 0.73],
            [0.54, 0.45],
            [0.35, 0.62],
            [0.12, 0.86],
        ))
        .unwrap();
        let recs = t.to_records();
        assert_eq!(recs.len(), 4);
        let rev_pos = recs
            .iter()
            .find(|r| r.example_id == "t:t|s1:jennifer|s2:gerald|a:x|pos")
            .unwrap();
        assert_eq!(
            (rev_pos.score_subject1, rev_pos.score_subject2),
            (0.45, 0.54)
        );
    }
}
