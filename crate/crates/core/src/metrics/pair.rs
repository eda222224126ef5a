use crate::score::{Order, Quartet, QuartetKey, Role, ScoreTable};
use crate::template::Polarity;
use crate::Scalar;

use Polarity::{Negated, Positive};

/// Order under which `role`'s subject is mentioned first.
fn leading_order(role: Role) -> Order {
    match role {
        Role::First => Order::FirstSecond,
        Role::Second => Order::SecondFirst,
    }
}

/// `|S(x1 | x1 first, a) - S(x1 | x2 first, a)|` with `x1` the subject in
/// `role`.
pub fn positional_error_of<T: Scalar>(q: &Quartet<T>, role: Role) -> T {
    let own = leading_order(role);
    (q.score(role, own, Positive) - q.score(role, own.reversed(), Positive)).abs()
}

/// Positional error of the canonical first subject.
pub fn positional_error<T: Scalar>(q: &Quartet<T>) -> T {
    positional_error_of(q, Role::First)
}

/// `|S(x1 | tau12(a)) - S(x2 | tau12(a-bar))|` with `x1` the subject in
/// `role`; both examples mention `x1` first.
pub fn attribute_error_of<T: Scalar>(q: &Quartet<T>, role: Role) -> T {
    let own = leading_order(role);
    (q.score(role, own, Positive) - q.score(role.other(), own, Negated)).abs()
}

/// Attribute error of the canonical first subject.
pub fn attribute_error<T: Scalar>(q: &Quartet<T>) -> T {
    attribute_error_of(q, Role::First)
}

/// Order-averaged score under the attribute minus order-averaged score
/// under its negation. Lies in `[-1, 1]` for scores in `[0, 1]`.
pub fn subject_bias<T: Scalar>(q: &Quartet<T>, role: Role) -> T {
    let half = T::half();
    let positive = half
        * (q.score(role, Order::FirstSecond, Positive)
            + q.score(role, Order::SecondFirst, Positive));
    let negated = half
        * (q.score(role, Order::FirstSecond, Negated) + q.score(role, Order::SecondFirst, Negated));
    positive - negated
}

/// `(B(first) - B(second)) / 2`; positive values favour the first subject.
pub fn comparative_bias<T: Scalar>(q: &Quartet<T>) -> T {
    T::half() * (subject_bias(q, Role::First) - subject_bias(q, Role::Second))
}

/// Per-quartet metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBias<T> {
    pub key: QuartetKey,
    pub bias_first: T,
    pub bias_second: T,
    pub comparative: T,
    pub positional_error: T,
    pub attribute_error: T,
}

impl<T: Scalar> PairBias<T> {
    pub fn of(q: &Quartet<T>) -> Self {
        let bias_first = subject_bias(q, Role::First);
        let bias_second = subject_bias(q, Role::Second);
        PairBias {
            key: q.key.clone(),
            bias_first,
            bias_second,
            comparative: T::half() * (bias_first - bias_second),
            positional_error: positional_error(q),
            attribute_error: attribute_error(q),
        }
    }

    /// Comparative bias oriented towards `subject`, or `None` if the subject
    /// is not part of this pair.
    pub fn comparative_for(&self, subject: &str) -> Option<T> {
        match self.key.role_of(subject)? {
            Role::First => Some(self.comparative),
            Role::Second => Some(-self.comparative),
        }
    }
}

/// [`PairBias`] of every quartet, in key order.
pub fn pair_biases<T: Scalar>(table: &ScoreTable<T>) -> Vec<PairBias<T>> {
    table.quartets().map(PairBias::of).collect()
}
