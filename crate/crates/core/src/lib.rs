//! Underspecified question-answering probes and confound-corrected
//! stereotyping-bias metrics.
//!
//! The crate is organised along the pipeline:
//!
//! * [`template`] loads probe configurations and renders every
//!   (template, subject pair, attribute) into four probe examples: both
//!   mention orders times both question polarities.
//! * [`score`] ingests per-example model scores and assembles them into
//!   complete [`Quartet`](score::Quartet)s.
//! * [`metrics`] computes the reasoning-error measures (positional and
//!   attribute errors), subject and comparative bias, and the dataset
//!   aggregates gamma, mu and eta.
//! * [`oracle`] synthesizes score tables from a known additive decomposition
//!   so that the metrics can be certified against injected bias.
//! * [`report`] ranks subject/attribute pairs and aggregates subject
//!   sentiment ranks across models.
//!
//! Metric code is generic over the [`Scalar`] type; the `*64` / `*32`
//! aliases below cover the common cases.

pub mod metrics;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod score;
pub mod template;

pub use scalar::Scalar;

/// Version tag written into every metric report.
pub const METRIC_VERSION: &str = concat!("qabias-metrics/", env!("CARGO_PKG_VERSION"));

pub type Quartet64 = score::Quartet<f64>;
pub type Quartet32 = score::Quartet<f32>;
pub type ScoreTable64 = score::ScoreTable<f64>;
pub type ScoreTable32 = score::ScoreTable<f32>;
pub type PairBias64 = metrics::PairBias<f64>;
pub type PairBias32 = metrics::PairBias<f32>;
pub type BiasAccumulator64 = metrics::BiasAccumulator<f64>;
pub type BiasAccumulator32 = metrics::BiasAccumulator<f32>;
pub type SyntheticModelSpec64 = oracle::SyntheticModelSpec<f64>;
pub type SyntheticModelSpec32 = oracle::SyntheticModelSpec<f32>;
