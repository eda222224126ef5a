use serde::Serialize;

use super::pair::{comparative_bias, PairBias};
use crate::score::{QuartetKey, ScoreTable};
use crate::Scalar;

/// Largest violation of each comparative-bias identity over a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub quartets: usize,
    pub tolerance: f64,
    /// `|C - C'|` where `C'` relabels which mention order is the forward one.
    pub positional_independence: f64,
    /// `|C(x1, x2, a) - C(x2, x1, a-bar)|`.
    pub attribute_dependence: f64,
    /// `|C(x1, x2, a) + C(x2, x1, a)|`.
    pub complementarity: f64,
    /// `max(|C| - 1, 0)`.
    pub range: f64,
    /// Cached `C` against `C` recomputed from the table's current scores, and
    /// against `(B1 - B2) / 2` from the cached subject biases.
    pub consistency: f64,
    /// Cached keys with no quartet in the table.
    pub missing_quartets: usize,
    pub worst_quartet: Option<QuartetKey>,
}

impl PropertyReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.positional_independence,
            self.attribute_dependence,
            self.complementarity,
            self.range,
            self.consistency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.missing_quartets == 0 && self.max_violation() <= self.tolerance
    }
}

/// Checks the identities against freshly computed comparative biases.
pub fn check_properties<T: Scalar>(table: &ScoreTable<T>, tolerance: f64) -> PropertyReport {
    let cache: Vec<PairBias<T>> = table.quartets().map(PairBias::of).collect();
    check_properties_cached(table, &cache, tolerance)
}

/// Checks the identities for previously computed `cache` entries against the
/// table's current scores, so later edits to the table are detected.
pub fn check_properties_cached<T: Scalar>(
    table: &ScoreTable<T>,
    cache: &[PairBias<T>],
    tolerance: f64,
) -> PropertyReport {
    let mut report = PropertyReport {
        quartets: cache.len(),
        tolerance,
        positional_independence: 0.0,
        attribute_dependence: 0.0,
        complementarity: 0.0,
        range: 0.0,
        consistency: 0.0,
        missing_quartets: 0,
        worst_quartet: None,
    };
    let mut worst = 0.0f64;
    for cached in cache {
        let Some(q) = table.get(&cached.key) else {
            report.missing_quartets += 1;
            continue;
        };
        let c = cached.comparative;
        let v = |x: T| x.abs().to_f64_lossy();
        let positional = v(c - comparative_bias(&q.with_orders_relabeled()));
        let negation = v(c - comparative_bias(&q.with_subjects_swapped().with_polarity_swapped()));
        let complement = v(c + comparative_bias(&q.with_subjects_swapped()));
        let range = (c.abs() - T::one()).max(T::zero()).to_f64_lossy();
        let consistency = v(c - comparative_bias(q))
            .max(v(c - T::half() * (cached.bias_first - cached.bias_second)));

        report.positional_independence = report.positional_independence.max(positional);
        report.attribute_dependence = report.attribute_dependence.max(negation);
        report.complementarity = report.complementarity.max(complement);
        report.range = report.range.max(range);
        report.consistency = report.consistency.max(consistency);
        let here = positional
            .max(negation)
            .max(complement)
            .max(range)
            .max(consistency);
        if here > worst {
            worst = here;
            report.worst_quartet = Some(cached.key.clone());
        }
    }
    report
}
