use serde::{Deserialize, Serialize};

use crate::template::{ExampleId, Polarity};
use crate::Scalar;

/// Identifies a quartet: template, subject pair and attribute.
///
/// Keys stored in a [`ScoreTable`](super::ScoreTable) are canonical
/// (`first < second`); transient keys produced by the relabeling helpers on
/// [`Quartet`] need not be.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuartetKey {
    pub template_id: String,
    pub first: String,
    pub second: String,
    pub attribute_id: String,
}

impl QuartetKey {
    /// Builds the canonical key for an unordered subject pair.
    pub fn canonical(template_id: &str, a: &str, b: &str, attribute_id: &str) -> Self {
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        QuartetKey {
            template_id: template_id.to_string(),
            first: first.to_string(),
            second: second.to_string(),
            attribute_id: attribute_id.to_string(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.first < self.second
    }

    /// The key an example belongs to, with its mention order.
    pub fn locate(id: &ExampleId) -> (Self, Order) {
        let key = Self::canonical(
            &id.template_id,
            &id.subject1_id,
            &id.subject2_id,
            &id.attribute_id,
        );
        let order = if key.first == id.subject1_id {
            Order::FirstSecond
        } else {
            Order::SecondFirst
        };
        (key, order)
    }

    pub fn example_id(&self, order: Order, polarity: Polarity) -> ExampleId {
        let (s1, s2) = match order {
            Order::FirstSecond => (&self.first, &self.second),
            Order::SecondFirst => (&self.second, &self.first),
        };
        ExampleId {
            template_id: self.template_id.clone(),
            subject1_id: s1.clone(),
            subject2_id: s2.clone(),
            attribute_id: self.attribute_id.clone(),
            polarity,
        }
    }

    pub fn subject(&self, role: Role) -> &str {
        match role {
            Role::First => &self.first,
            Role::Second => &self.second,
        }
    }

    /// Role `subject` plays in this pair, if any.
    pub fn role_of(&self, subject: &str) -> Option<Role> {
        if self.first == subject {
            Some(Role::First)
        } else if self.second == subject {
            Some(Role::Second)
        } else {
            None
        }
    }
}

/// Which subject of the key is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    First,
    Second,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::First, Role::Second];

    pub fn other(self) -> Role {
        match self {
            Role::First => Role::Second,
            Role::Second => Role::First,
        }
    }
}

/// Mention order of the key's subjects in the paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// `first` is mentioned first.
    FirstSecond,
    SecondFirst,
}

impl Order {
    pub const ALL: [Order; 2] = [Order::FirstSecond, Order::SecondFirst];

    pub fn reversed(self) -> Order {
        match self {
            Order::FirstSecond => Order::SecondFirst,
            Order::SecondFirst => Order::FirstSecond,
        }
    }

    /// The role mentioned first under this order.
    pub fn leading(self) -> Role {
        match self {
            Order::FirstSecond => Role::First,
            Order::SecondFirst => Role::Second,
        }
    }
}

/// Eight subject scores: both subjects, both mention orders, both polarities.
#[derive(Debug, Clone, PartialEq)]
pub struct Quartet<T> {
    pub key: QuartetKey,
    scores: [T; 8],
}

fn slot(role: Role, order: Order, polarity: Polarity) -> usize {
    let p = match polarity {
        Polarity::Positive => 0,
        Polarity::Negated => 4,
    };
    let o = match order {
        Order::FirstSecond => 0,
        Order::SecondFirst => 2,
    };
    let r = match role {
        Role::First => 0,
        Role::Second => 1,
    };
    p + o + r
}

impl<T: Scalar> Quartet<T> {
    pub fn from_fn(key: QuartetKey, mut score: impl FnMut(Role, Order, Polarity) -> T) -> Self {
        let mut scores = [T::zero(); 8];
        for polarity in Polarity::ALL {
            for order in Order::ALL {
                for role in Role::ALL {
                    scores[slot(role, order, polarity)] = score(role, order, polarity);
                }
            }
        }
        Quartet { key, scores }
    }

    /// Builds a quartet from `[first, second]` score pairs for each
    /// (polarity, order) example.
    pub fn from_pairs(
        key: QuartetKey,
        positive_forward: [T; 2],
        positive_reversed: [T; 2],
        negated_forward: [T; 2],
        negated_reversed: [T; 2],
    ) -> Self {
        Self::from_fn(key, |role, order, polarity| {
            let pair = match (polarity, order) {
                (Polarity::Positive, Order::FirstSecond) => positive_forward,
                (Polarity::Positive, Order::SecondFirst) => positive_reversed,
                (Polarity::Negated, Order::FirstSecond) => negated_forward,
                (Polarity::Negated, Order::SecondFirst) => negated_reversed,
            };
            match role {
                Role::First => pair[0],
                Role::Second => pair[1],
            }
        })
    }

    /// Score of `role`'s subject in the example with the given mention order
    /// and polarity.
    pub fn score(&self, role: Role, order: Order, polarity: Polarity) -> T {
        self.scores[slot(role, order, polarity)]
    }

    pub fn set_score(&mut self, role: Role, order: Order, polarity: Polarity, value: T) {
        self.scores[slot(role, order, polarity)] = value;
    }

    pub fn scores(&self) -> &[T; 8] {
        &self.scores
    }

    /// The same quartet seen from the other subject: `first` and `second`
    /// exchange, and so do the mention-order labels.
    pub fn with_subjects_swapped(&self) -> Self {
        let key = QuartetKey {
            template_id: self.key.template_id.clone(),
            first: self.key.second.clone(),
            second: self.key.first.clone(),
            attribute_id: self.key.attribute_id.clone(),
        };
        Self::from_fn(key, |role, order, polarity| {
            self.score(role.other(), order.reversed(), polarity)
        })
    }

    /// Exchanges which mention order is labelled the forward one.
    pub fn with_orders_relabeled(&self) -> Self {
        Self::from_fn(self.key.clone(), |role, order, polarity| {
            self.score(role, order.reversed(), polarity)
        })
    }

    /// Exchanges the roles of the attribute and its negation.
    pub fn with_polarity_swapped(&self) -> Self {
        Self::from_fn(self.key.clone(), |role, order, polarity| {
            self.score(role, order, polarity.flipped())
        })
    }

    pub fn all_in_unit_range(&self) -> bool {
        self.scores
            .iter()
            .all(|s| *s >= T::zero() && *s <= T::one())
    }
}
