//! Synthetic scorer with a known additive decomposition.
//!
//! Every subject score is built as
//!
//! ```text
//! S(x | order, polarity) = base + s_p * s_x * b/2 + f(order, x) + g(x) (+ noise)
//! ```
//!
//! where `b` is the true pairwise bias towards the canonical first subject,
//! `s_p` is +1 for the attribute and -1 for its negation, `s_x` is +1 for the
//! first subject and -1 for the second, `f` is a positional offset and `g`
//! an attribute-independent lexical offset. Subject bias then recovers `b`
//! exactly, `f` and `g` cancel out of the comparative bias, and only `f`
//! reaches the positional error.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::score::{Order, Quartet, QuartetKey, Role, ScoreRecord, ScoreTable};
use crate::template::{ExampleId, Polarity, ProbeExample};
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid synthetic model: {0}")]
    InvalidSpec(String),
    #[error("noise-free score {score} for {example_id} is outside [0, 1]")]
    OutOfRange { example_id: String, score: f64 },
    #[error("example id {0:?} is malformed")]
    BadExampleId(String),
}

/// True bias `b(x1, x2, a)`; antisymmetric in the subjects by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BiasField<T> {
    #[default]
    Zero,
    /// `b = value` towards the canonical first subject of every pair.
    Uniform(T),
    /// `b(x1, x2, a) = v(x1, a) - v(x2, a)`; absent entries are zero.
    Potential(BTreeMap<(String, String), T>),
}

impl<T: Scalar> BiasField<T> {
    /// A single planted (subject, attribute) preference.
    pub fn planted(subject: &str, attribute: &str, value: T) -> Self {
        BiasField::Potential(BTreeMap::from([(
            (subject.to_string(), attribute.to_string()),
            value,
        )]))
    }

    /// Bias towards `key.first`.
    pub fn value(&self, key: &QuartetKey) -> T {
        match self {
            BiasField::Zero => T::zero(),
            BiasField::Uniform(b) => *b,
            BiasField::Potential(v) => {
                let get = |s: &str| {
                    v.get(&(s.to_string(), key.attribute_id.clone()))
                        .copied()
                        .unwrap_or_else(T::zero)
                };
                get(&key.first) - get(&key.second)
            }
        }
    }
}

/// Offset `f(order, subject)` added regardless of attribute and polarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionalOffsets<T> {
    /// Indexed `[order][role]`: `FirstSecond = 0`, `First = 0`.
    pub table: [[T; 2]; 2],
}

impl<T: Scalar> PositionalOffsets<T> {
    pub fn zero() -> Self {
        PositionalOffsets {
            table: [[T::zero(); 2]; 2],
        }
    }

    /// The subject mentioned first gains `p`, the other loses `p`.
    pub fn leading(p: T) -> Self {
        PositionalOffsets {
            table: [[p, -p], [-p, p]],
        }
    }

    pub fn get(&self, order: Order, role: Role) -> T {
        let o = match order {
            Order::FirstSecond => 0,
            Order::SecondFirst => 1,
        };
        let r = match role {
            Role::First => 0,
            Role::Second => 1,
        };
        self.table[o][r]
    }
}

/// Lexical offset `g(x | partner)`, independent of order and polarity.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LexicalField<T> {
    #[default]
    Zero,
    /// `+value` for the canonical first subject, `-value` for the second.
    Uniform(T),
    /// `g(x | y) = w(x)`; absent subjects get zero.
    PerSubject(BTreeMap<String, T>),
}

impl<T: Scalar> LexicalField<T> {
    pub fn value(&self, key: &QuartetKey, role: Role) -> T {
        match self {
            LexicalField::Zero => T::zero(),
            LexicalField::Uniform(g) => match role {
                Role::First => *g,
                Role::Second => -*g,
            },
            LexicalField::PerSubject(w) => {
                w.get(key.subject(role)).copied().unwrap_or_else(T::zero)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModelSpec<T> {
    pub model_id: String,
    pub base: T,
    pub bias: BiasField<T>,
    pub positional: PositionalOffsets<T>,
    pub lexical: LexicalField<T>,
    /// Standard deviation of Gaussian noise added to every score.
    pub noise: T,
    pub seed: u64,
}

impl<T: Scalar> Default for SyntheticModelSpec<T> {
    fn default() -> Self {
        SyntheticModelSpec {
            model_id: "synthetic".to_string(),
            base: T::half(),
            bias: BiasField::Zero,
            positional: PositionalOffsets::zero(),
            lexical: LexicalField::Zero,
            noise: T::zero(),
            seed: 0,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl<T: Scalar> SyntheticModelSpec<T> {
    fn validate(&self) -> Result<(), OracleError> {
        if !(self.base >= T::zero() && self.base <= T::one()) {
            return Err(OracleError::InvalidSpec(format!(
                "base {} outside [0, 1]",
                self.base
            )));
        }
        if !(self.noise.is_finite() && self.noise >= T::zero()) {
            return Err(OracleError::InvalidSpec(format!(
                "noise {} must be finite and >= 0",
                self.noise
            )));
        }
        Ok(())
    }

    /// Noise-free score of `role`'s subject.
    pub fn clean_score(&self, key: &QuartetKey, role: Role, order: Order, polarity: Polarity) -> T {
        let half_b = T::half() * self.bias.value(key);
        let signed = match (polarity, role) {
            (Polarity::Positive, Role::First) | (Polarity::Negated, Role::Second) => half_b,
            _ => -half_b,
        };
        self.base + signed + self.positional.get(order, role) + self.lexical.value(key, role)
    }

    /// `(first, second)` scores for one example, noise included.
    fn example_scores(
        &self,
        key: &QuartetKey,
        order: Order,
        polarity: Polarity,
    ) -> Result<(T, T), OracleError> {
        let id = key.example_id(order, polarity).to_string();
        let mut pair = [T::zero(); 2];
        for (slot, role) in Role::ALL.into_iter().enumerate() {
            let clean = self.clean_score(key, role, order, polarity);
            if !(clean >= T::zero() && clean <= T::one()) {
                return Err(OracleError::OutOfRange {
                    example_id: id,
                    score: clean.to_f64_lossy(),
                });
            }
            pair[slot] = clean;
        }
        if self.noise > T::zero() {
            // One stream per example: output is independent of scheduling.
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(fnv1a(id.as_bytes()));
            for s in &mut pair {
                let z: f64 = rng.sample(StandardNormal);
                *s = (*s + self.noise * T::from_f64_lossy(z))
                    .max(T::zero())
                    .min(T::one());
            }
        }
        Ok((pair[0], pair[1]))
    }

    fn quartet(&self, key: QuartetKey) -> Result<Quartet<T>, OracleError> {
        let mut q = Quartet::from_fn(key.clone(), |_, _, _| T::zero());
        for order in Order::ALL {
            for polarity in Polarity::ALL {
                let (first, second) = self.example_scores(&key, order, polarity)?;
                q.set_score(Role::First, order, polarity, first);
                q.set_score(Role::Second, order, polarity, second);
            }
        }
        Ok(q)
    }
}

fn locate(example: &ProbeExample) -> Result<(QuartetKey, Order), OracleError> {
    let id: ExampleId = example
        .example_id
        .parse()
        .map_err(|_| OracleError::BadExampleId(example.example_id.clone()))?;
    Ok(QuartetKey::locate(&id))
}

/// Scores every quartet the dataset touches; all quartets come out complete.
pub fn synthesize<'a, T: Scalar>(
    spec: &SyntheticModelSpec<T>,
    dataset: impl IntoIterator<Item = &'a ProbeExample>,
) -> Result<ScoreTable<T>, OracleError> {
    spec.validate()?;
    let keys: BTreeSet<QuartetKey> = dataset
        .into_iter()
        .map(|e| locate(e).map(|(k, _)| k))
        .collect::<Result<_, _>>()?;
    let keys: Vec<QuartetKey> = keys.into_iter().collect();
    let quartets: Vec<Quartet<T>> = keys
        .into_par_iter()
        .map(|k| spec.quartet(k))
        .collect::<Result<_, _>>()?;
    let mut table = ScoreTable::new(spec.model_id.clone());
    for q in quartets {
        table
            .insert(q)
            .expect("synthetic quartets are canonical, unique and in range");
    }
    Ok(table)
}

/// One score record per dataset example, in dataset order.
pub fn synthesize_records<'a, T: Scalar>(
    spec: &SyntheticModelSpec<T>,
    dataset: impl IntoIterator<Item = &'a ProbeExample>,
) -> Result<Vec<ScoreRecord>, OracleError> {
    spec.validate()?;
    let examples: Vec<&ProbeExample> = dataset.into_iter().collect();
    examples
        .par_iter()
        .map(|e| {
            let (key, order) = locate(e)?;
            let (first, second) = spec.example_scores(&key, order, e.polarity)?;
            let (s1, s2) = match order.leading() {
                Role::First => (first, second),
                Role::Second => (second, first),
            };
            Ok(ScoreRecord {
                example_id: e.example_id.clone(),
                score_subject1: s1.to_f64_lossy(),
                score_subject2: s2.to_f64_lossy(),
                model_id: spec.model_id.clone(),
            })
        })
        .collect()
}
