//! Dataset ingestion, schema validation, and group derivation.
//!
//! Everything downstream — impact audits, test batteries, training —
//! consumes the types defined here. All of them are immutable after
//! construction and safe to share across threads.

mod dataset;
mod grouping;
mod schema;
mod validate;

pub use dataset::{load_dataset, save_dataset, CandidateRecord, Dataset, LoadReport};
pub use grouping::{derive_groups, GroupKey, GroupedView, GroupingScheme};
pub use schema::{ColumnRole, ColumnSchema, ColumnSpec};
pub use validate::{validate_dataset, ValidationReport};

/// Groups smaller than this are flagged (never dropped) by default;
/// below it the group-stats tests are unreliable.
pub const DEFAULT_MIN_GROUP_SIZE: usize = 30;
