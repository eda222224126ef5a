use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pair::{attribute_error, comparative_bias, positional_error, PairBias};
use super::MetricsError;
use crate::scalar::mean;
use crate::score::{Quartet, ScoreTable};
use crate::{Scalar, METRIC_VERSION};

/// Sign of `c`, with `(-theta, theta)` mapped to zero. With `theta = 0`
/// only an exact zero maps to zero.
pub fn sign_with_threshold<T: Scalar>(c: T, theta: T) -> T {
    if c.abs() < theta || c == T::zero() {
        T::zero()
    } else if c > T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

fn check_theta<T: Scalar>(theta: T) -> Result<(), MetricsError> {
    if theta.is_finite() && theta >= T::zero() {
        Ok(())
    } else {
        Err(MetricsError::InvalidThreshold(theta.to_f64_lossy()))
    }
}

/// Mean positional error over all quartets.
pub fn dataset_delta<T: Scalar>(table: &ScoreTable<T>) -> Result<T, MetricsError> {
    mean(table.quartets().map(positional_error)).ok_or(MetricsError::EmptyTable)
}

/// Mean attribute error over all quartets.
pub fn dataset_epsilon<T: Scalar>(table: &ScoreTable<T>) -> Result<T, MetricsError> {
    mean(table.quartets().map(attribute_error)).ok_or(MetricsError::EmptyTable)
}

/// Comparative bias of every quartet with `subject` and `attribute`,
/// oriented towards `subject`.
fn oriented<'t, T: Scalar>(
    table: &'t ScoreTable<T>,
    subject: &'t str,
    attribute: &'t str,
) -> impl Iterator<Item = T> + 't {
    table
        .quartets()
        .filter(move |q| q.key.attribute_id == attribute)
        .filter_map(move |q| {
            let c = comparative_bias(q);
            match q.key.role_of(subject)? {
                crate::score::Role::First => Some(c),
                crate::score::Role::Second => Some(-c),
            }
        })
}

fn no_support(subject: &str, attribute: Option<&str>) -> MetricsError {
    MetricsError::NoSupport {
        subject: subject.to_string(),
        attribute: attribute.map(str::to_string),
    }
}

/// Mean comparative bias of `subject` over every partner and template under
/// `attribute`.
pub fn gamma<T: Scalar>(
    subject: &str,
    attribute: &str,
    table: &ScoreTable<T>,
) -> Result<T, MetricsError> {
    mean(oriented(table, subject, attribute)).ok_or_else(|| no_support(subject, Some(attribute)))
}

/// Mean of `gamma(subject, a)` over the attributes the subject has data for.
pub fn gamma_subject<T: Scalar>(subject: &str, table: &ScoreTable<T>) -> Result<T, MetricsError> {
    let per_attribute = table
        .attributes()
        .into_iter()
        .filter_map(|a| gamma(subject, a, table).ok());
    mean(per_attribute).ok_or_else(|| no_support(subject, None))
}

/// Mean sign of the comparative bias of `subject` under `attribute`.
pub fn eta<T: Scalar>(
    subject: &str,
    attribute: &str,
    table: &ScoreTable<T>,
    theta: T,
) -> Result<T, MetricsError> {
    check_theta(theta)?;
    mean(oriented(table, subject, attribute).map(|c| sign_with_threshold(c, theta)))
        .ok_or_else(|| no_support(subject, Some(attribute)))
}

/// Mean over subjects of the largest `|gamma(subject, a)|` over attributes.
pub fn bias_intensity<T: Scalar>(table: &ScoreTable<T>) -> Result<T, MetricsError> {
    let attributes = table.attributes();
    let per_subject = table.subjects().into_iter().map(|x| {
        attributes
            .iter()
            .filter_map(|a| gamma(x, a, table).ok())
            .map(T::abs)
            .fold(T::zero(), T::max)
    });
    mean(per_subject).ok_or(MetricsError::EmptyTable)
}

/// Mean of `|eta(subject, a)|` over every supported (subject, attribute).
pub fn eta_dataset<T: Scalar>(table: &ScoreTable<T>, theta: T) -> Result<T, MetricsError> {
    check_theta(theta)?;
    let attributes = table.attributes();
    let cells = table.subjects().into_iter().flat_map(|x| {
        attributes
            .iter()
            .filter_map(move |a| eta(x, a, table, theta).ok())
            .map(T::abs)
    });
    mean(cells.collect::<Vec<_>>()).ok_or(MetricsError::EmptyTable)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Cell<T> {
    gamma_sum: T,
    sign_sum: T,
    count: usize,
}

/// Single-pass reduction of a score table into every dataset metric.
///
/// Accumulators over disjoint quartet sets combine with [`merge`](Self::merge);
/// the result does not depend on how quartets were partitioned beyond
/// floating-point summation order.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasAccumulator<T> {
    theta: T,
    quartets: usize,
    delta_sum: T,
    epsilon_sum: T,
    answer_prob_sum: T,
    cells: BTreeMap<(String, String), Cell<T>>,
}

impl<T: Scalar> BiasAccumulator<T> {
    pub fn new(theta: T) -> Result<Self, MetricsError> {
        check_theta(theta)?;
        Ok(BiasAccumulator {
            theta,
            quartets: 0,
            delta_sum: T::zero(),
            epsilon_sum: T::zero(),
            answer_prob_sum: T::zero(),
            cells: BTreeMap::new(),
        })
    }

    pub fn push(&mut self, q: &Quartet<T>) {
        let pb = PairBias::of(q);
        self.quartets += 1;
        self.delta_sum = self.delta_sum + pb.positional_error;
        self.epsilon_sum = self.epsilon_sum + pb.attribute_error;
        self.answer_prob_sum = self.answer_prob_sum + q.scores().iter().copied().sum::<T>();
        let attribute = &q.key.attribute_id;
        for (subject, c) in [
            (&q.key.first, pb.comparative),
            (&q.key.second, -pb.comparative),
        ] {
            let cell = self
                .cells
                .entry((subject.clone(), attribute.clone()))
                .or_default();
            cell.gamma_sum = cell.gamma_sum + c;
            cell.sign_sum = cell.sign_sum + sign_with_threshold(c, self.theta);
            cell.count += 1;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.quartets += other.quartets;
        self.delta_sum = self.delta_sum + other.delta_sum;
        self.epsilon_sum = self.epsilon_sum + other.epsilon_sum;
        self.answer_prob_sum = self.answer_prob_sum + other.answer_prob_sum;
        for (k, c) in other.cells {
            let cell = self.cells.entry(k).or_default();
            cell.gamma_sum = cell.gamma_sum + c.gamma_sum;
            cell.sign_sum = cell.sign_sum + c.sign_sum;
            cell.count += c.count;
        }
        self
    }

    pub fn finish(self, model_id: &str) -> Result<MetricsReport, MetricsError> {
        if self.quartets == 0 {
            return Err(MetricsError::EmptyTable);
        }
        let n = T::from_usize(self.quartets).unwrap();
        let f = T::to_f64_lossy;

        let rows: Vec<SubjectAttributeBias> = self
            .cells
            .iter()
            .map(|((subject, attribute), cell)| {
                let count = T::from_usize(cell.count).unwrap();
                SubjectAttributeBias {
                    subject_id: subject.clone(),
                    attribute_id: attribute.clone(),
                    gamma: f(cell.gamma_sum / count),
                    eta: f(cell.sign_sum / count),
                    support_count: cell.count,
                }
            })
            .collect();

        // Rows are sorted by (subject, attribute), so subjects are contiguous.
        let mut subjects: Vec<SubjectBias> = Vec::new();
        let mut max_abs_gamma: Vec<T> = Vec::new();
        for ((subject, _), cell) in &self.cells {
            let g = cell.gamma_sum / T::from_usize(cell.count).unwrap();
            match subjects.last_mut() {
                Some(last) if last.subject_id == *subject => {
                    last.gamma += f(g);
                    last.attributes += 1;
                    let m = max_abs_gamma.last_mut().unwrap();
                    *m = m.max(g.abs());
                }
                _ => {
                    subjects.push(SubjectBias {
                        subject_id: subject.clone(),
                        gamma: f(g),
                        attributes: 1,
                    });
                    max_abs_gamma.push(g.abs());
                }
            }
        }
        for s in &mut subjects {
            s.gamma /= s.attributes as f64;
        }

        let mu = mean(max_abs_gamma).unwrap();
        let eta_abs = mean(
            self.cells
                .values()
                .map(|c| (c.sign_sum / T::from_usize(c.count).unwrap()).abs()),
        )
        .unwrap();

        Ok(MetricsReport {
            metric_version: METRIC_VERSION.to_string(),
            theta: f(self.theta),
            summary: ModelSummary {
                model_id: model_id.to_string(),
                quartets: self.quartets,
                delta: f(self.delta_sum / n),
                epsilon: f(self.epsilon_sum / n),
                mu: f(mu),
                eta_abs: f(eta_abs),
                avg_answer_prob: f(self.answer_prob_sum / (n * T::from_f64_lossy(8.0))),
            },
            subjects,
            rows,
        })
    }
}

/// Model-level summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    pub quartets: usize,
    /// Positional dependence, in [0, 1].
    pub delta: f64,
    /// Attribute independence, in [0, 1].
    pub epsilon: f64,
    /// Bias intensity, in [0, 1].
    pub mu: f64,
    /// Mean absolute count-based win ratio, in [0, 1].
    pub eta_abs: f64,
    pub avg_answer_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectAttributeBias {
    pub subject_id: String,
    pub attribute_id: String,
    pub gamma: f64,
    pub eta: f64,
    pub support_count: usize,
}

/// Subject score aggregated over attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectBias {
    pub subject_id: String,
    pub gamma: f64,
    pub attributes: usize,
}

/// Everything the `metrics` command writes: summary plus full grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metric_version: String,
    pub theta: f64,
    pub summary: ModelSummary,
    pub subjects: Vec<SubjectBias>,
    pub rows: Vec<SubjectAttributeBias>,
}

/// Computes a [`MetricsReport`] in one sequential pass.
pub fn summarize<T: Scalar>(
    table: &ScoreTable<T>,
    theta: T,
) -> Result<MetricsReport, MetricsError> {
    let mut acc = BiasAccumulator::new(theta)?;
    for q in table.quartets() {
        acc.push(q);
    }
    acc.finish(&table.model_id)
}

/// [`summarize`] with quartets folded on the rayon pool.
pub fn summarize_par<T: Scalar>(
    table: &ScoreTable<T>,
    theta: T,
) -> Result<MetricsReport, MetricsError> {
    let empty = BiasAccumulator::new(theta)?;
    let quartets: Vec<&Quartet<T>> = table.quartets().collect();
    let acc = quartets
        .par_iter()
        .fold(
            || empty.clone(),
            |mut acc, q| {
                acc.push(q);
                acc
            },
        )
        .reduce(|| empty.clone(), BiasAccumulator::merge);
    acc.finish(&table.model_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{avg_answer_prob, QuartetKey};
    use approx::assert_abs_diff_eq;

    /// Quartet whose comparative bias towards `first` is exactly `c`.
    fn with_bias(template: &str, a: &str, b: &str, attribute: &str, c: f64) -> Quartet<f64> {
        let key = QuartetKey::canonical(template, a, b, attribute);
        let c = if key.first == a { c } else { -c };
        Quartet::from_pairs(
            key,
            [0.5 + c / 2.0, 0.5 - c / 2.0],
            [0.5 + c / 2.0, 0.5 - c / 2.0],
            [0.5 - c / 2.0, 0.5 + c / 2.0],
            [0.5 - c / 2.0, 0.5 + c / 2.0],
        )
    }

    fn table(qs: Vec<Quartet<f64>>) -> ScoreTable<f64> {
        let mut t = ScoreTable::new("m");
        for q in qs {
            t.insert(q).unwrap();
        }
        t
    }

    #[test]
    fn delta_epsilon_means() {
        let one = table(vec![Quartet::from_pairs(
            QuartetKey::canonical("t", "a", "b", "x"),
            [0.26, 0.73],
            [0.54, 0.45],
            [0.35, 0.62],
            [0.12, 0.86],
        )]);
        assert_abs_diff_eq!(dataset_delta(&one).unwrap(), 0.28, epsilon = 1e-12);
        assert_abs_diff_eq!(dataset_epsilon(&one).unwrap(), 0.36, epsilon = 1e-12);

        let two = table(vec![
            Quartet::from_pairs(
                QuartetKey::canonical("t", "a", "b", "x"),
                [0.6, 0.4],
                [0.4, 0.6],
                [0.5, 0.5],
                [0.5, 0.5],
            ),
            Quartet::from_pairs(
                QuartetKey::canonical("t", "a", "c", "x"),
                [0.7, 0.3],
                [0.3, 0.7],
                [0.5, 0.5],
                [0.5, 0.5],
            ),
        ]);
        assert_abs_diff_eq!(dataset_delta(&two).unwrap(), 0.3, epsilon = 1e-12);
        assert_eq!(
            dataset_delta(&ScoreTable::<f64>::new("m")),
            Err(MetricsError::EmptyTable)
        );
    }

    #[test]
    fn gamma_examples() {
        let t = table(vec![with_bias("t", "a", "b", "x", 0.2)]);
        assert_abs_diff_eq!(gamma("a", "x", &t).unwrap(), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(gamma("b", "x", &t).unwrap(), -0.2, epsilon = 1e-12);
        assert!(matches!(
            gamma("a", "y", &t),
            Err(MetricsError::NoSupport { .. })
        ));
        assert!(matches!(
            gamma_subject("zed", &t),
            Err(MetricsError::NoSupport {
                attribute: None,
                ..
            })
        ));

        let t = table(vec![
            with_bias("t1", "a", "b", "x", 0.2),
            with_bias("t2", "a", "c", "x", 0.4),
            with_bias("t1", "a", "b", "y", 0.0),
        ]);
        assert_abs_diff_eq!(gamma("a", "x", &t).unwrap(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(gamma_subject("a", &t).unwrap(), 0.15, epsilon = 1e-12);
    }

    #[test]
    fn bias_intensity_examples() {
        let fair = table(vec![with_bias("t", "a", "b", "x", 0.0)]);
        assert_eq!(bias_intensity(&fair).unwrap(), 0.0);

        // Subject a: |gamma| 0.1 and 0.3 -> 0.3; b mirrors a.
        let t = table(vec![
            with_bias("t", "a", "b", "x", 0.1),
            with_bias("t", "a", "b", "y", -0.3),
        ]);
        assert_abs_diff_eq!(bias_intensity(&t).unwrap(), 0.3, epsilon = 1e-12);

        // Subjects a, c with maxima 0.2 and 0.4 against partners b, d whose own
        // maxima are the same, so the mean of maxima is 0.3.
        let t = table(vec![
            with_bias("t", "a", "b", "x", 0.2),
            with_bias("t", "c", "d", "x", 0.4),
        ]);
        assert_abs_diff_eq!(bias_intensity(&t).unwrap(), 0.3, epsilon = 1e-12);
        assert_eq!(
            bias_intensity(&ScoreTable::<f64>::new("m")),
            Err(MetricsError::EmptyTable)
        );
    }

    #[test]
    fn eta_examples() {
        let t = table(vec![
            with_bias("t", "a", "b", "x", 0.1),
            with_bias("t", "a", "c", "x", 0.4),
        ]);
        assert_eq!(eta("a", "x", &t, 0.0).unwrap(), 1.0);

        let t = table(vec![
            with_bias("t", "a", "b", "x", 0.3),
            with_bias("t", "a", "c", "x", -0.3),
        ]);
        assert_eq!(eta("a", "x", &t, 0.0).unwrap(), 0.0);

        let t = table(vec![
            with_bias("t", "a", "b", "x", 0.05),
            with_bias("t", "a", "c", "x", 0.5),
        ]);
        assert_abs_diff_eq!(eta("a", "x", &t, 0.1).unwrap(), 0.5, epsilon = 1e-12);
        assert!(matches!(
            eta("a", "x", &t, -1.0),
            Err(MetricsError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn sign_ties_map_to_zero() {
        assert_eq!(sign_with_threshold(0.0, 0.0), 0.0);
        assert_eq!(sign_with_threshold(-0.0, 0.0), 0.0);
        assert_eq!(sign_with_threshold(1e-300, 0.0), 1.0);
        assert_eq!(sign_with_threshold(-0.09, 0.1), 0.0);
        assert_eq!(sign_with_threshold(-0.1, 0.1), -1.0);
    }

    #[test]
    fn summary_matches_direct_functions() {
        let t = table(vec![
            with_bias("t", "a", "b", "x", 0.1),
            with_bias("t", "a", "c", "x", -0.4),
            with_bias("t", "b", "c", "y", 0.25),
            Quartet::from_pairs(
                QuartetKey::canonical("t", "a", "b", "y"),
                [0.26, 0.73],
                [0.54, 0.45],
                [0.35, 0.62],
                [0.12, 0.86],
            ),
        ]);
        let r = summarize(&t, 0.0).unwrap();
        assert_abs_diff_eq!(r.summary.delta, dataset_delta(&t).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.summary.epsilon,
            dataset_epsilon(&t).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(r.summary.mu, bias_intensity(&t).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.summary.eta_abs,
            eta_dataset(&t, 0.0).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            r.summary.avg_answer_prob,
            avg_answer_prob(&t).unwrap(),
            epsilon = 1e-12
        );
        for row in &r.rows {
            assert_abs_diff_eq!(
                row.gamma,
                gamma(&row.subject_id, &row.attribute_id, &t).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                row.eta,
                eta(&row.subject_id, &row.attribute_id, &t, 0.0).unwrap(),
                epsilon = 1e-12
            );
        }
        for s in &r.subjects {
            assert_abs_diff_eq!(
                s.gamma,
                gamma_subject(&s.subject_id, &t).unwrap(),
                epsilon = 1e-12
            );
        }
        let p = summarize_par(&t, 0.0).unwrap();
        assert_abs_diff_eq!(p.summary.mu, r.summary.mu, epsilon = 1e-12);
        assert_eq!(p.rows.len(), r.rows.len());
    }
}
