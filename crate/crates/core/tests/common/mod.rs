//! Helpers shared by the integration test targets.
//!
//! [`Naive`] recomputes every metric straight from example-level score
//! records with nested loops, independently of the quartet layout used by
//! the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use qabias::score::ScoreRecord;
use qabias::template::{bundled, generate, Mode, ProbeConfig, ProbeExample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// A bundled configuration cut down to the first `templates` templates,
/// `subjects` subjects and `attributes` attributes.
pub fn small_config(
    name: &str,
    templates: usize,
    subjects: usize,
    attributes: usize,
) -> ProbeConfig {
    let mut c = bundled(name).unwrap();
    c.templates.truncate(templates);
    c.subjects.truncate(subjects);
    c.attributes.truncate(attributes);
    c
}

pub fn dataset(config: &ProbeConfig) -> Vec<ProbeExample> {
    generate(config, Mode::Qa).collect()
}

/// Uniform random scores in [0, 1] for every example.
pub fn random_records(examples: &[ProbeExample], seed: u64) -> Vec<ScoreRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    examples
        .iter()
        .map(|e| ScoreRecord {
            example_id: e.example_id.clone(),
            score_subject1: rng.random::<f64>(),
            score_subject2: rng.random::<f64>(),
            model_id: "random".into(),
        })
        .collect()
}

fn id(t: &str, s1: &str, s2: &str, a: &str, positive: bool) -> String {
    format!(
        "t:{t}|s1:{s1}|s2:{s2}|a:{a}|{}",
        if positive { "pos" } else { "neg" }
    )
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub struct Naive {
    scores: HashMap<String, (f64, f64)>,
    templates: BTreeSet<String>,
    subjects: BTreeSet<String>,
    attributes: BTreeSet<String>,
}

impl Naive {
    pub fn new(records: &[ScoreRecord]) -> Self {
        let mut n = Naive {
            scores: HashMap::new(),
            templates: BTreeSet::new(),
            subjects: BTreeSet::new(),
            attributes: BTreeSet::new(),
        };
        for r in records {
            let parts: Vec<&str> = r.example_id.split('|').collect();
            n.templates.insert(parts[0][2..].to_string());
            n.subjects.insert(parts[1][3..].to_string());
            n.subjects.insert(parts[2][3..].to_string());
            n.attributes.insert(parts[3][2..].to_string());
            n.scores
                .insert(r.example_id.clone(), (r.score_subject1, r.score_subject2));
        }
        n
    }

    /// Score of `who` in the example mentioning `first` before `second`.
    pub fn s(
        &self,
        t: &str,
        first: &str,
        second: &str,
        a: &str,
        positive: bool,
        who: &str,
    ) -> Option<f64> {
        let (s1, s2) = *self.scores.get(&id(t, first, second, a, positive))?;
        Some(if who == first { s1 } else { s2 })
    }

    fn complete(&self, t: &str, x: &str, y: &str, a: &str) -> bool {
        [true, false].iter().all(|&p| {
            self.scores.contains_key(&id(t, x, y, a, p))
                && self.scores.contains_key(&id(t, y, x, a, p))
        })
    }

    pub fn b(&self, t: &str, x: &str, y: &str, a: &str) -> f64 {
        let s = |f: &str, g: &str, p| self.s(t, f, g, a, p, x).unwrap();
        0.5 * (s(x, y, true) + s(y, x, true)) - 0.5 * (s(x, y, false) + s(y, x, false))
    }

    pub fn c(&self, t: &str, x: &str, y: &str, a: &str) -> f64 {
        0.5 * (self.b(t, x, y, a) - self.b(t, y, x, a))
    }

    /// Every complete (template, x < y, attribute).
    pub fn cells(&self) -> Vec<(String, String, String, String)> {
        let mut out = Vec::new();
        for t in &self.templates {
            for x in &self.subjects {
                for y in &self.subjects {
                    if x >= y {
                        continue;
                    }
                    for a in &self.attributes {
                        if self.complete(t, x, y, a) {
                            out.push((t.clone(), x.clone(), y.clone(), a.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn delta(&self) -> f64 {
        let v: Vec<f64> = self
            .cells()
            .iter()
            .map(|(t, x, y, a)| {
                (self.s(t, x, y, a, true, x).unwrap() - self.s(t, y, x, a, true, x).unwrap()).abs()
            })
            .collect();
        mean(&v)
    }

    pub fn epsilon(&self) -> f64 {
        let v: Vec<f64> = self
            .cells()
            .iter()
            .map(|(t, x, y, a)| {
                (self.s(t, x, y, a, true, x).unwrap() - self.s(t, x, y, a, false, y).unwrap()).abs()
            })
            .collect();
        mean(&v)
    }

    fn oriented(&self, x: &str, a: &str) -> Vec<f64> {
        let mut v = Vec::new();
        for t in &self.templates {
            for y in &self.subjects {
                if y != x && self.complete(t, x, y, a) {
                    v.push(self.c(t, x, y, a));
                }
            }
        }
        v
    }

    pub fn gamma(&self, x: &str, a: &str) -> Option<f64> {
        let v = self.oriented(x, a);
        (!v.is_empty()).then(|| mean(&v))
    }

    pub fn gamma_subject(&self, x: &str) -> Option<f64> {
        let v: Vec<f64> = self
            .attributes
            .iter()
            .filter_map(|a| self.gamma(x, a))
            .collect();
        (!v.is_empty()).then(|| mean(&v))
    }

    pub fn eta(&self, x: &str, a: &str, theta: f64) -> Option<f64> {
        let v: Vec<f64> = self
            .oriented(x, a)
            .into_iter()
            .map(|c| {
                if c >= theta && c > 0.0 {
                    1.0
                } else if c <= -theta && c < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        (!v.is_empty()).then(|| mean(&v))
    }

    pub fn mu(&self) -> f64 {
        let v: Vec<f64> = self
            .subjects
            .iter()
            .map(|x| {
                self.attributes
                    .iter()
                    .filter_map(|a| self.gamma(x, a))
                    .map(f64::abs)
                    .fold(0.0, f64::max)
            })
            .collect();
        mean(&v)
    }

    pub fn eta_dataset(&self, theta: f64) -> f64 {
        let mut v = Vec::new();
        for x in &self.subjects {
            for a in &self.attributes {
                if let Some(e) = self.eta(x, a, theta) {
                    v.push(e.abs());
                }
            }
        }
        mean(&v)
    }

    /// gamma(x, a) for every supported cell.
    pub fn gamma_grid(&self) -> BTreeMap<(String, String), f64> {
        let mut out = BTreeMap::new();
        for x in &self.subjects {
            for a in &self.attributes {
                if let Some(g) = self.gamma(x, a) {
                    out.insert((x.clone(), a.clone()), g);
                }
            }
        }
        out
    }
}
