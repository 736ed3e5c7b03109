//! Hiring-fairness audit and mitigation toolkit.
//!
//! Implements, side by side, the bias-detection and bias-mitigation
//! procedures used by automated hiring systems, so that each procedure's
//! behavior, assumptions, and failure modes can be exercised on real or
//! synthetic candidate data:
//!
//! - [`impact`] — classification-parity audits: selection rates, the EEOC
//!   4/5ths impact ratio, error-rate balance, calibration checks.
//! - [`stats`] — the per-metric statistical test battery: one-way ANOVA,
//!   two-sample Hotelling's T², an in-house F-distribution tail.
//! - [`proxy`] — proxy-feature discovery via per-feature association and
//!   unsupervised clustering against protected groups.
//! - [`training`] — group-normalized corrected objectives, the 4/5ths
//!   penalty term, the iterative feature-removal mitigation loop, and
//!   role-profile fit scoring.
//! - [`uk`] — the UK Equality Act 2010 pool-for-comparison procedure
//!   (proportions x and y, no prescribed threshold).
//! - [`text`] — gendered-wording and inclusion analysis of job ads.
//! - [`funnel`] — stage-by-stage demographic analytics and reviewer
//!   agreement.
//! - [`report`] / [`synth`] — audit orchestration, report rendering, and
//!   a synthetic candidate-data generator with planted ground truth.
//!
//! All operations are pure functions over immutable inputs; anything
//! stochastic takes an explicit seed.

pub mod audit;
pub mod data;
pub mod error;
#[cfg(test)]
pub(crate) mod testutil;
pub mod funnel;
pub mod impact;
pub mod numeric;
pub mod proxy;
pub mod report;
pub mod stats;
pub mod synth;
pub mod text;
pub mod training;
pub mod uk;

pub use audit::{AuditResult, Verdict};
pub use data::{
    CandidateRecord, ColumnRole, ColumnSchema, Dataset, GroupKey, GroupedView, GroupingScheme,
};
pub use error::{Error, Result};
