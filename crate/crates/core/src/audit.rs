//! The report fragment every audit emits.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::GroupKey;

/// Outcome of a thresholded check. UK-profile results are always
/// `Contextual`: the Equality Act procedure prescribes no ratio, so a
/// pass/fail verdict would misrepresent it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Contextual,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Contextual => write!(f, "contextual — no prescribed threshold"),
        }
    }
}

/// One metric's value, threshold, verdict, and jurisdiction annotation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditResult {
    pub metric: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_group: BTreeMap<GroupKey, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub verdict: Verdict,
    pub jurisdiction: String,
    /// Which real-world procedure this check implements. Never empty.
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub const JURISDICTION_EEOC: &str = "EEOC Uniform Guidelines";
pub const JURISDICTION_UK: &str = "UK Equality Act 2010";
