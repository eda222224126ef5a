//! Reasoning-error measures, subject and comparative bias, and their
//! dataset-level aggregates.
//!
//! Conventions shared by every function here:
//!
//! * Scores are used unnormalized, exactly as ingested.
//! * The positional and attribute errors of a quartet are taken from the
//!   canonical first subject's point of view on positive-polarity examples.
//! * Subject/attribute aggregates orient each quartet's comparative bias
//!   towards the subject being aggregated (complementarity), so a subject is
//!   averaged over every partner and template it appears with.
//! * All means are unweighted arithmetic means.

mod aggregate;
mod pair;
mod properties;

use thiserror::Error;

pub use aggregate::{
    bias_intensity, dataset_delta, dataset_epsilon, eta, eta_dataset, gamma, gamma_subject,
    sign_with_threshold, summarize, summarize_par, BiasAccumulator, MetricsReport, ModelSummary,
    SubjectAttributeBias, SubjectBias,
};
pub use pair::{
    attribute_error, attribute_error_of, comparative_bias, pair_biases, positional_error,
    positional_error_of, subject_bias, PairBias,
};
pub use properties::{check_properties, check_properties_cached, PropertyReport};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("score table is empty")]
    EmptyTable,
    #[error("no quartets support subject {subject:?}{}", attribute.as_ref().map(|a| format!(" with attribute {a:?}")).unwrap_or_default())]
    NoSupport {
        subject: String,
        attribute: Option<String>,
    },
    #[error("threshold must be finite and non-negative, got {0}")]
    InvalidThreshold(f64),
}
