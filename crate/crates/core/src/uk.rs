//! The Equality Act 2010 Code of Practice pool-for-comparison procedure.
//!
//! A provision, criterion or practice defines the pool: exactly the
//! workers it affects, positively or negatively. Within the pool, x is
//! the proportion of workers without the protected characteristic who
//! are disadvantaged and y the proportion with it. The procedure
//! compares x with y — and prescribes no ratio: whether a difference is
//! significant depends on context, so UK reports never carry a pass/fail
//! verdict. An optional two-proportion z test annotates the comparison
//! in the style courts have accepted as formal statistical evidence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditResult, Verdict, JURISDICTION_UK};
use crate::data::{Dataset, GroupKey};
use crate::error::{Error, Result};
use crate::stats::special::normal_two_sided_p;

/// Pools below this size get a smallness warning on the report.
pub const SMALL_POOL_WARNING_N: usize = 30;

/// The provision, criterion or practice under scrutiny, as a predicate
/// over records. A record is in the pool iff the practice applies to it
/// at all; it is disadvantaged iff the practice comes out against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Practice {
    /// Applies to records with an outcome at the stage; disadvantages
    /// those who failed it.
    StagePass { stage: String },
    /// Applies to scored records; disadvantages scores below the cut.
    ScoreAtLeast { threshold: f64 },
}

impl Practice {
    pub fn describe(&self) -> String {
        match self {
            Practice::StagePass { stage } => format!("pass stage `{stage}`"),
            Practice::ScoreAtLeast { threshold } => format!("score >= {threshold}"),
        }
    }

    /// `None` if the practice does not affect the record, otherwise
    /// whether the record is disadvantaged.
    fn disadvantaged(&self, rec: &crate::data::CandidateRecord) -> Option<bool> {
        match self {
            Practice::StagePass { stage } => rec.outcomes.get(stage).map(|passed| !passed),
            Practice::ScoreAtLeast { threshold } => rec.score.map(|s| s < *threshold),
        }
    }
}

/// The protected characteristic being compared: one category of one
/// attribute ("with"); every other category is "without".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Characteristic {
    pub attribute: String,
    pub category: String,
}

/// The pool for comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pool {
    pub practice: Practice,
    pub characteristic: Characteristic,
    /// Record indices in the pool (affected by the practice, with a
    /// known characteristic value).
    pub members: Vec<usize>,
    /// Disadvantage flag per member, aligned with `members`.
    pub disadvantaged: Vec<bool>,
    /// With-characteristic flag per member, aligned with `members`.
    pub with_characteristic: Vec<bool>,
    /// Affected records excluded for a missing characteristic value.
    pub excluded_missing_characteristic: usize,
    /// Records the practice does not affect (outside the pool).
    pub unaffected: usize,
}

impl Pool {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Builds the pool: exactly the records the practice affects, excluding
/// (and counting) those without a known characteristic value.
pub fn build_pool(
    dataset: &Dataset,
    practice: &Practice,
    characteristic: &Characteristic,
) -> Result<Pool> {
    if dataset
        .schema
        .categories_of(&characteristic.attribute)
        .is_none()
    {
        return Err(Error::UnknownAttribute(characteristic.attribute.clone()));
    }
    if let Practice::StagePass { stage } = practice {
        if !dataset.schema.stages.iter().any(|s| s == stage) {
            return Err(Error::UnknownStage(stage.clone()));
        }
    }
    let mut members = Vec::new();
    let mut disadvantaged = Vec::new();
    let mut with_characteristic = Vec::new();
    let mut excluded = 0usize;
    let mut unaffected = 0usize;
    for (i, rec) in dataset.records.iter().enumerate() {
        match practice.disadvantaged(rec) {
            None => unaffected += 1,
            Some(dis) => match rec.protected.get(&characteristic.attribute) {
                None => excluded += 1,
                Some(cat) => {
                    members.push(i);
                    disadvantaged.push(dis);
                    with_characteristic.push(*cat == characteristic.category);
                }
            },
        }
    }
    if members.is_empty() {
        return Err(Error::EmptyPool {
            practice: practice.describe(),
        });
    }
    Ok(Pool {
        practice: practice.clone(),
        characteristic: characteristic.clone(),
        members,
        disadvantaged,
        with_characteristic,
        excluded_missing_characteristic: excluded,
        unaffected,
    })
}

/// x and y with the counts behind them. disparity = y − x, positive when
/// the protected group is more disadvantaged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoolComparison {
    /// Proportion of workers WITHOUT the characteristic disadvantaged.
    pub x: f64,
    /// Proportion of workers WITH the characteristic disadvantaged.
    pub y: f64,
    pub with_total: usize,
    pub with_disadvantaged: usize,
    pub without_total: usize,
    pub without_disadvantaged: usize,
    pub disparity: f64,
    /// Optional Seymour-Smith-style significance annotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

/// Computes x and y within the pool. Errors if either sub-pool is empty
/// (there is then no comparison to make).
pub fn proportion_comparison(pool: &Pool) -> Result<PoolComparison> {
    let mut with_total = 0usize;
    let mut with_dis = 0usize;
    let mut without_total = 0usize;
    let mut without_dis = 0usize;
    for (with, dis) in pool.with_characteristic.iter().zip(&pool.disadvantaged) {
        if *with {
            with_total += 1;
            with_dis += *dis as usize;
        } else {
            without_total += 1;
            without_dis += *dis as usize;
        }
    }
    if with_total == 0 {
        return Err(Error::EmptySubPool { which: "with" });
    }
    if without_total == 0 {
        return Err(Error::EmptySubPool { which: "without" });
    }
    let y = with_dis as f64 / with_total as f64;
    let x = without_dis as f64 / without_total as f64;
    Ok(PoolComparison {
        x,
        y,
        with_total,
        with_disadvantaged: with_dis,
        without_total,
        without_disadvantaged: without_dis,
        disparity: y - x,
        z: None,
        p: None,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoProportionTest {
    pub z: f64,
    pub p: f64,
    /// Pooled proportion was 0 or 1; no variation to test against.
    pub degenerate: bool,
}

/// Pooled two-proportion z statistic for k1/n1 vs k2/n2 with a two-sided
/// normal p-value (erf-based, absolute error <= 1e-9).
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TwoProportionTest> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(Error::InvalidTestInput {
            test: "two_proportion_test",
            requirement: "n1, n2 >= 1 and k <= n".into(),
        });
    }
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if pooled == 0.0 || pooled == 1.0 {
        return Ok(TwoProportionTest {
            z: 0.0,
            p: 1.0,
            degenerate: true,
        });
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (p1 - p2) / se;
    Ok(TwoProportionTest {
        z,
        p: normal_two_sided_p(z),
        degenerate: false,
    })
}

/// Attaches the z test to a comparison: disadvantage of the
/// with-characteristic group versus the rest, sign matching `disparity`.
pub fn with_significance(comparison: &PoolComparison) -> Result<PoolComparison> {
    let t = two_proportion_test(
        comparison.with_disadvantaged as u64,
        comparison.with_total as u64,
        comparison.without_disadvantaged as u64,
        comparison.without_total as u64,
    )?;
    let mut c = comparison.clone();
    c.z = Some(t.z);
    c.p = Some(t.p);
    Ok(c)
}

/// The UK report: x, y, the counts, the optional significance
/// annotation — and explicitly no pass/fail verdict. The law the
/// procedure comes from sets no threshold, and justification
/// (a proportionate means of achieving a legitimate aim) is a judgment
/// left to people, recorded here only as a free-text field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UkAssessment {
    pub pool_size: usize,
    pub practice: String,
    pub characteristic: Characteristic,
    pub comparison: PoolComparison,
    pub annotations: Vec<String>,
    /// Filled by the auditor, never computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub justification_notes: Option<String>,
}

pub fn uk_assessment_report(pool: &Pool, comparison: &PoolComparison) -> (UkAssessment, AuditResult) {
    let mut annotations = vec![
        "no prescribed threshold: UK practice weighs the difference in context (pool size and the numbers behind the proportions)".to_string(),
        "justification — whether the practice is a proportionate means of achieving a legitimate aim — is outside computational scope".to_string(),
        "pool construction assumes no material differences in circumstances between the compared groups; that judgment is not automated".to_string(),
    ];
    let mut warnings = Vec::new();
    if pool.size() < SMALL_POOL_WARNING_N {
        let w = format!(
            "small pool (n = {} < {SMALL_POOL_WARNING_N}); proportions are fragile",
            pool.size()
        );
        annotations.push(w.clone());
        warnings.push(w);
    }
    if pool.excluded_missing_characteristic > 0 {
        warnings.push(format!(
            "{} affected records excluded for a missing `{}` value",
            pool.excluded_missing_characteristic, pool.characteristic.attribute
        ));
    }
    if comparison.z.is_some() {
        annotations.push(
            "two-proportion z test attached (the formal statistical-evidence approach)".to_string(),
        );
    }
    let assessment = UkAssessment {
        pool_size: pool.size(),
        practice: pool.practice.describe(),
        characteristic: pool.characteristic.clone(),
        comparison: comparison.clone(),
        annotations: annotations.clone(),
        justification_notes: None,
    };
    let audit = AuditResult {
        metric: format!(
            "uk-pool-comparison[{}={}]",
            pool.characteristic.attribute, pool.characteristic.category
        ),
        value: comparison.disparity,
        per_group: BTreeMap::from([
            (GroupKey::of(["with"]), comparison.y),
            (GroupKey::of(["without"]), comparison.x),
        ]),
        threshold: None,
        verdict: Verdict::Contextual,
        jurisdiction: JURISDICTION_UK.into(),
        provenance: "Equality Act 2010 Code of Practice pool-for-comparison".into(),
        warnings,
    };
    (assessment, audit)
}

/// Plain-text rendering mirroring the Code's bullet sequence.
pub fn render_uk_text(assessment: &UkAssessment) -> String {
    let c = &assessment.comparison;
    let mut out = String::new();
    out.push_str(&format!(
        "pool for comparison: {} workers affected by practice ({})\n",
        assessment.pool_size, assessment.practice
    ));
    out.push_str(&format!(
        "- proportion of the pool with the protected characteristic ({}={}): {:.4}\n",
        assessment.characteristic.attribute,
        assessment.characteristic.category,
        c.with_total as f64 / assessment.pool_size as f64
    ));
    out.push_str(&format!(
        "- workers without the characteristic disadvantaged: {} of {} -> x = {:.4}\n",
        c.without_disadvantaged, c.without_total, c.x
    ));
    out.push_str(&format!(
        "- workers with the characteristic disadvantaged: {} of {} -> y = {:.4}\n",
        c.with_disadvantaged, c.with_total, c.y
    ));
    out.push_str(&format!(
        "- comparing x with y: disparity y - x = {:+.4}\n",
        c.disparity
    ));
    if let (Some(z), Some(p)) = (c.z, c.p) {
        out.push_str(&format!("- two-proportion z = {z:.4}, two-sided p = {p:.6}\n"));
    }
    for a in &assessment.annotations {
        out.push_str(&format!("note: {a}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::two_group_dataset;

    #[test]
    fn worked_pool_example() {
        // 100 with the characteristic, 40 disadvantaged; 200 without,
        // 30 disadvantaged -> y = 0.40, x = 0.15, disparity 0.25.
        let ds = two_group_dataset(100, 200, 60, 170);
        let pool = build_pool(
            &ds,
            &Practice::StagePass {
                stage: "screening".into(),
            },
            &Characteristic {
                attribute: "gender".into(),
                category: "A".into(),
            },
        )
        .unwrap();
        assert_eq!(pool.size(), 300);
        let c = proportion_comparison(&pool).unwrap();
        assert_eq!(c.y, 0.40);
        assert_eq!(c.x, 0.15);
        assert_eq!(c.disparity, 0.25);
        assert_eq!(c.with_total, 100);
        assert_eq!(c.without_total, 200);
    }

    #[test]
    fn identical_rates_have_zero_disparity_and_report_still_emits() {
        let ds = two_group_dataset(50, 100, 25, 50);
        let pool = build_pool(
            &ds,
            &Practice::StagePass {
                stage: "screening".into(),
            },
            &Characteristic {
                attribute: "gender".into(),
                category: "A".into(),
            },
        )
        .unwrap();
        let c = proportion_comparison(&pool).unwrap();
        assert_eq!(c.disparity, 0.0);
        let (assessment, audit) = uk_assessment_report(&pool, &c);
        assert_eq!(audit.verdict, Verdict::Contextual);
        assert!(audit.threshold.is_none());
        let text = render_uk_text(&assessment);
        assert!(text.contains("no prescribed threshold"));
        assert!(!text.contains("pass\n") && !text.contains("fail\n"));
    }

    #[test]
    fn practice_never_reached_gives_empty_pool() {
        // Nobody has an outcome at `interview` when no A-passer exists.
        let ds = two_group_dataset(10, 10, 0, 5);
        let err = build_pool(
            &ds,
            &Practice::StagePass {
                stage: "interview".into(),
            },
            &Characteristic {
                attribute: "gender".into(),
                category: "A".into(),
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyPool { .. }));
    }

    #[test]
    fn score_practice_pools_scored_records_only() {
        let mut ds = two_group_dataset(10, 10, 5, 5);
        for (i, rec) in ds.records.iter_mut().enumerate() {
            if i < 15 {
                rec.score = Some(i as f64);
            }
        }
        let pool = build_pool(
            &ds,
            &Practice::ScoreAtLeast { threshold: 5.0 },
            &Characteristic {
                attribute: "gender".into(),
                category: "A".into(),
            },
        )
        .unwrap();
        assert_eq!(pool.size(), 15);
        assert_eq!(pool.unaffected, 5);
        // Scores 0..=4 are disadvantaged.
        assert_eq!(pool.disadvantaged.iter().filter(|d| **d).count(), 5);
    }

    #[test]
    fn empty_sub_pool_is_named() {
        let ds = two_group_dataset(10, 0, 5, 0);
        let pool = build_pool(
            &ds,
            &Practice::StagePass {
                stage: "screening".into(),
            },
            &Characteristic {
                attribute: "gender".into(),
                category: "A".into(),
            },
        )
        .unwrap();
        match proportion_comparison(&pool).unwrap_err() {
            Error::EmptySubPool { which } => assert_eq!(which, "without"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn two_proportion_edges() {
        let t = two_proportion_test(5, 10, 10, 20).unwrap();
        assert_eq!(t.z, 0.0);
        assert_eq!(t.p, 1.0);
        assert!(!t.degenerate);

        let t = two_proportion_test(0, 10, 0, 10).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.p, 1.0);
    }

    #[test]
    fn small_pool_warning_attached() {
        let ds = two_group_dataset(10, 10, 5, 5);
        let pool = build_pool(
            &ds,
            &Practice::StagePass {
                stage: "screening".into(),
            },
            &Characteristic {
                attribute: "gender".into(),
                category: "A".into(),
            },
        )
        .unwrap();
        let c = proportion_comparison(&pool).unwrap();
        let (assessment, audit) = uk_assessment_report(&pool, &c);
        assert!(assessment.annotations.iter().any(|a| a.contains("small pool")));
        assert!(audit.warnings.iter().any(|w| w.contains("small pool")));
    }
}
