//! Classification-parity audits over a grouped view: selection rates,
//! the 4/5ths impact ratio, error-rate balance, and calibration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditResult, Verdict, JURISDICTION_EEOC};
use crate::data::{Dataset, GroupKey, GroupedView};
use crate::error::{Error, Result};

/// The EEOC 4/5ths boundary. Inclusive: a ratio of exactly 0.8 passes.
pub const FOUR_FIFTHS_THRESHOLD: f64 = 0.8;

/// Members-per-bin floor below which a group is ignored inside one
/// calibration bin.
pub const DEFAULT_MIN_BIN_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMode {
    /// selected / applicants per group: standard EEOC practice.
    Rate,
    /// Raw selected counts, no denominators — reproduces audits that
    /// divide hired counts directly (the 320/350 style of comparison).
    Frequency,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRow {
    /// `None` in frequency mode (no denominators exist).
    pub applicants: Option<u64>,
    pub selected: u64,
    /// Defined iff applicants > 0 (rate mode only).
    pub rate: Option<f64>,
    pub small: bool,
}

/// Per-group applicant/selected counts at one funnel stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionTable {
    pub mode: RatioMode,
    pub rows: BTreeMap<GroupKey, SelectionRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SelectionTable {
    /// Frequency-mode table from raw selected counts.
    pub fn from_counts(counts: impl IntoIterator<Item = (GroupKey, u64)>) -> Self {
        let rows = counts
            .into_iter()
            .map(|(k, c)| {
                (
                    k,
                    SelectionRow {
                        applicants: None,
                        selected: c,
                        rate: None,
                        small: false,
                    },
                )
            })
            .collect();
        SelectionTable {
            mode: RatioMode::Frequency,
            rows,
            warnings: vec![],
        }
    }

    /// The value the impact ratio compares for one group: the rate in
    /// rate mode, the raw count in frequency mode. `None` if undefined.
    fn comparable(&self, row: &SelectionRow) -> Option<f64> {
        match self.mode {
            RatioMode::Rate => row.rate,
            RatioMode::Frequency => Some(row.selected as f64),
        }
    }
}

/// min/max comparison across the extreme groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImpactRatioResult {
    pub ratio: f64,
    pub max_group: GroupKey,
    pub min_group: GroupKey,
    pub threshold: f64,
    pub verdict: Verdict,
    pub mode: RatioMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Per-group selection rates at a funnel stage. Applicants are the
/// records with an outcome recorded at that stage.
pub fn selection_rates(
    dataset: &Dataset,
    view: &GroupedView,
    stage: &str,
) -> Result<SelectionTable> {
    if !dataset.schema.stages.iter().any(|s| s == stage) {
        return Err(Error::UnknownStage(stage.to_owned()));
    }
    let mut rows = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut any_applicants = false;
    for (key, indices) in &view.groups {
        let mut applicants = 0u64;
        let mut selected = 0u64;
        for &i in indices {
            if let Some(&passed) = dataset.records[i].outcomes.get(stage) {
                applicants += 1;
                if passed {
                    selected += 1;
                }
            }
        }
        any_applicants |= applicants > 0;
        let rate = (applicants > 0).then(|| selected as f64 / applicants as f64);
        if applicants == 0 {
            warnings.push(format!(
                "group {key} has no applicants at stage `{stage}`; excluded from the ratio"
            ));
        }
        let small = view.is_small(key);
        if small {
            warnings.push(format!(
                "group {key} is below min group size {}; excluded from the extreme-group search",
                view.min_group_size
            ));
        }
        rows.insert(
            key.clone(),
            SelectionRow {
                applicants: Some(applicants),
                selected,
                rate,
                small,
            },
        );
    }
    if !any_applicants {
        return Err(Error::StageEmpty(stage.to_owned()));
    }
    Ok(SelectionTable {
        mode: RatioMode::Rate,
        rows,
        warnings,
    })
}

/// Ratio of the lowest to the highest group value (rate or count).
/// Small or undefined groups are left out of the extreme search but stay
/// listed in the table.
pub fn impact_ratio(table: &SelectionTable, threshold: f64) -> Result<ImpactRatioResult> {
    let eligible: Vec<(&GroupKey, f64)> = table
        .rows
        .iter()
        .filter(|(_, row)| !row.small)
        .filter_map(|(k, row)| table.comparable(row).map(|v| (k, v)))
        .collect();
    if eligible.len() < 2 {
        return Err(Error::TooFewGroups(eligible.len()));
    }
    let (min_group, min_v) = eligible
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(b.0)))
        .unwrap();
    let (max_group, max_v) = eligible
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| b.0.cmp(a.0)))
        .unwrap();
    let mut warnings = table.warnings.clone();
    let ratio = if *max_v == 0.0 {
        warnings.push("all groups have zero selections; ratio defined as 1".into());
        1.0
    } else {
        min_v / max_v
    };
    let verdict = if ratio >= threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ImpactRatioResult {
        ratio,
        max_group: (*max_group).clone(),
        min_group: (*min_group).clone(),
        threshold,
        verdict,
        mode: table.mode,
        warnings,
    })
}

/// The EEOC 4/5ths rule at a funnel stage: selection rates composed with
/// the impact ratio at the 0.8 threshold.
pub fn four_fifths_check(
    dataset: &Dataset,
    view: &GroupedView,
    stage: &str,
) -> Result<AuditResult> {
    let table = selection_rates(dataset, view, stage)?;
    let result = impact_ratio(&table, FOUR_FIFTHS_THRESHOLD)?;
    Ok(audit_result_from_ratio(&table, &result, stage))
}

/// Renders an impact-ratio outcome as an audit fragment.
pub fn audit_result_from_ratio(
    table: &SelectionTable,
    result: &ImpactRatioResult,
    stage: &str,
) -> AuditResult {
    let per_group = table
        .rows
        .iter()
        .filter_map(|(k, row)| table.comparable(row).map(|v| (k.clone(), v)))
        .collect();
    AuditResult {
        metric: format!("impact-ratio[{stage}]"),
        value: result.ratio,
        per_group,
        threshold: Some(result.threshold),
        verdict: result.verdict,
        jurisdiction: JURISDICTION_EEOC.into(),
        provenance: "4/5ths rule, Uniform Guidelines on Employee Selection Procedures".into(),
        warnings: result.warnings.clone(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRateRow {
    /// FP / (FP + TN); `None` when the group has no negative labels.
    pub false_positive_rate: Option<f64>,
    /// FN / (FN + TP); `None` when the group has no positive labels.
    pub false_negative_rate: Option<f64>,
    pub n: usize,
}

/// Per-group false-positive/false-negative rates with min/max ratios —
/// the error-ratio comparison that catches disparate mistreatment
/// (suitable candidates wrongly rejected) which selection-rate checks
/// miss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRateTable {
    pub rows: BTreeMap<GroupKey, ErrorRateRow>,
    pub fpr_ratio: Option<f64>,
    pub fnr_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// min/max ratio over defined rates. Both-zero extremes mean no
/// disparity (1); exactly one zero is maximal disparity (0).
fn min_max_ratio(rates: &[f64]) -> Option<f64> {
    if rates.len() < 2 {
        return None;
    }
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == 0.0 {
        Some(1.0)
    } else {
        Some(min / max)
    }
}

/// Confusion-rate balance across groups given hard predictions and
/// ground-truth labels (indexed per record).
pub fn error_rate_balance(
    view: &GroupedView,
    predictions: &[bool],
    labels: &[Option<bool>],
) -> Result<ErrorRateTable> {
    let missing = view
        .eligible_indices()
        .iter()
        .filter(|&&i| labels[i].is_none())
        .count();
    if missing > 0 {
        return Err(Error::MissingLabels(missing));
    }

    let mut rows = BTreeMap::new();
    let mut warnings = Vec::new();
    for (key, indices) in &view.groups {
        let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
        for &i in indices {
            let label = labels[i].unwrap();
            match (predictions[i], label) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        let fpr = if fp + tn > 0 {
            Some(fp as f64 / (fp + tn) as f64)
        } else {
            warnings.push(format!("group {key}: all labels positive, FPR undefined"));
            None
        };
        let fnr = if fn_ + tp > 0 {
            Some(fn_ as f64 / (fn_ + tp) as f64)
        } else {
            warnings.push(format!("group {key}: all labels negative, FNR undefined"));
            None
        };
        rows.insert(
            key.clone(),
            ErrorRateRow {
                false_positive_rate: fpr,
                false_negative_rate: fnr,
                n: indices.len(),
            },
        );
    }
    let fprs: Vec<f64> = rows.values().filter_map(|r| r.false_positive_rate).collect();
    let fnrs: Vec<f64> = rows.values().filter_map(|r| r.false_negative_rate).collect();
    Ok(ErrorRateTable {
        fpr_ratio: min_max_ratio(&fprs),
        fnr_ratio: min_max_ratio(&fnrs),
        rows,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub low: f64,
    pub high: f64,
    /// Per-group (members in bin, positive-outcome rate).
    pub group_rates: BTreeMap<GroupKey, (usize, f64)>,
}

/// Calibration audit: within equal-width score bins, how far apart are
/// the groups' realized outcome rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub bins: Vec<CalibrationBin>,
    pub bin_count: usize,
    /// Largest within-bin spread between groups that meet `min_bin_n`.
    pub max_gap: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Equal-width-bin calibration check with the default per-bin floor.
pub fn calibration_audit(
    view: &GroupedView,
    scores: &[Option<f64>],
    outcomes: &[Option<bool>],
    bin_count: usize,
) -> Result<CalibrationResult> {
    calibration_audit_with(view, scores, outcomes, bin_count, DEFAULT_MIN_BIN_N)
}

/// Same as [`calibration_audit`] with an explicit per-bin group floor.
/// Equal-width bins keep intervals comparable across groups (quantile
/// bins would not). A degenerate score range collapses to one bin.
pub fn calibration_audit_with(
    view: &GroupedView,
    scores: &[Option<f64>],
    outcomes: &[Option<bool>],
    bin_count: usize,
    min_bin_n: usize,
) -> Result<CalibrationResult> {
    if bin_count < 2 {
        return Err(Error::InvalidTestInput {
            test: "calibration_audit",
            requirement: "bin_count >= 2".into(),
        });
    }
    // Scored+labeled eligible records only.
    let mut usable: Vec<(usize, &GroupKey, f64, bool)> = Vec::new();
    for (key, indices) in &view.groups {
        for &i in indices {
            if let (Some(s), Some(o)) = (scores[i], outcomes[i]) {
                if !s.is_finite() {
                    return Err(Error::InvalidTestInput {
                        test: "calibration_audit",
                        requirement: format!("finite scores (record index {i})"),
                    });
                }
                usable.push((i, key, s, o));
            }
        }
    }
    if usable.is_empty() {
        return Err(Error::InvalidTestInput {
            test: "calibration_audit",
            requirement: "at least one scored record with an outcome".into(),
        });
    }
    let lo = usable.iter().map(|u| u.2).fold(f64::INFINITY, f64::min);
    let hi = usable.iter().map(|u| u.2).fold(f64::NEG_INFINITY, f64::max);
    let mut warnings = Vec::new();
    let bins_used = if hi == lo {
        warnings.push("degenerate score range (all scores equal): single bin".into());
        1
    } else {
        bin_count
    };
    let width = if bins_used == 1 { 1.0 } else { (hi - lo) / bins_used as f64 };

    let mut tallies: Vec<BTreeMap<GroupKey, (usize, usize)>> = vec![BTreeMap::new(); bins_used];
    for (_, key, s, o) in &usable {
        let mut b = if bins_used == 1 {
            0
        } else {
            ((s - lo) / width) as usize
        };
        if b >= bins_used {
            b = bins_used - 1; // score == hi lands in the last bin
        }
        let entry = tallies[b].entry((*key).clone()).or_insert((0, 0));
        entry.0 += 1;
        if *o {
            entry.1 += 1;
        }
    }

    let mut bins = Vec::with_capacity(bins_used);
    let mut max_gap = 0.0f64;
    for (b, tally) in tallies.iter().enumerate() {
        let group_rates: BTreeMap<GroupKey, (usize, f64)> = tally
            .iter()
            .map(|(k, (n, pos))| (k.clone(), (*n, *pos as f64 / *n as f64)))
            .collect();
        let eligible: Vec<f64> = group_rates
            .values()
            .filter(|(n, _)| *n >= min_bin_n)
            .map(|(_, r)| *r)
            .collect();
        if eligible.len() >= 2 {
            let lo_r = eligible.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi_r = eligible.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            max_gap = max_gap.max(hi_r - lo_r);
        }
        bins.push(CalibrationBin {
            low: lo + b as f64 * width,
            high: if b + 1 == bins_used { hi } else { lo + (b + 1) as f64 * width },
            group_rates,
        });
    }
    Ok(CalibrationResult {
        bins,
        bin_count: bins_used,
        max_gap,
        warnings,
    })
}
