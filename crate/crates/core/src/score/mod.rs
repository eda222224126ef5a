//! Model score ingestion and quartet assembly.

mod ingest;
mod quartet;
mod table;

pub use ingest::{ingest, ingest_records, DatasetIndex, IngestError, IngestReport};
pub use quartet::{Order, Quartet, QuartetKey, Role};
pub use table::{avg_answer_prob, EmptyTable, ScoreRecord, ScoreTable, TableError};
