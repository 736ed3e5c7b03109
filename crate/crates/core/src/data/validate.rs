//! Report-only dataset health check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::dataset::Dataset;
use crate::data::schema::ColumnRole;

/// Missing-value counts, constant features, and protected-group sizes.
/// Never fails: problems become issue strings, not errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: usize,
    /// Per column. For stage-outcome columns "missing" means the
    /// candidate never reached the stage.
    pub missing_per_column: BTreeMap<String, usize>,
    pub constant_features: Vec<String>,
    /// attribute -> category -> count.
    pub group_sizes: BTreeMap<String, BTreeMap<String, usize>>,
    pub issues: Vec<String>,
}

pub fn validate_dataset(dataset: &Dataset) -> ValidationReport {
    let n = dataset.len();
    let mut missing: BTreeMap<String, usize> = BTreeMap::new();
    let mut constant_features = Vec::new();
    let mut group_sizes: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut issues = Vec::new();

    for (j, name) in dataset.feature_names.iter().enumerate() {
        let present: Vec<f64> = dataset
            .records
            .iter()
            .filter_map(|r| r.features[j])
            .collect();
        missing.insert(name.clone(), n - present.len());
        if !present.is_empty() && present.iter().all(|v| *v == present[0]) {
            constant_features.push(name.clone());
            issues.push(format!("feature `{name}` is constant"));
        }
    }

    for (name, spec) in &dataset.schema.columns {
        match spec.role {
            ColumnRole::Protected => {
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                let mut miss = 0usize;
                for rec in &dataset.records {
                    match rec.protected.get(name) {
                        Some(cat) => *counts.entry(cat.clone()).or_default() += 1,
                        None => miss += 1,
                    }
                }
                missing.insert(name.clone(), miss);
                group_sizes.insert(name.clone(), counts);
            }
            ColumnRole::Score => {
                missing.insert(
                    name.clone(),
                    dataset.records.iter().filter(|r| r.score.is_none()).count(),
                );
            }
            ColumnRole::Label => {
                missing.insert(
                    name.clone(),
                    dataset.records.iter().filter(|r| r.label.is_none()).count(),
                );
            }
            ColumnRole::StageOutcome => {
                missing.insert(
                    name.clone(),
                    dataset
                        .records
                        .iter()
                        .filter(|r| !r.outcomes.contains_key(name))
                        .count(),
                );
            }
            ColumnRole::ReviewerScore => {
                missing.insert(
                    name.clone(),
                    dataset
                        .records
                        .iter()
                        .filter(|r| !r.reviewer_scores.contains_key(name))
                        .count(),
                );
            }
            ColumnRole::Id | ColumnRole::Feature => {}
        }
    }

    for (name, spec) in &dataset.schema.columns {
        let is_reporting_gap = matches!(
            spec.role,
            ColumnRole::Feature | ColumnRole::Protected | ColumnRole::Score | ColumnRole::Label
        );
        if is_reporting_gap {
            if let Some(&m) = missing.get(name) {
                if m > 0 {
                    issues.push(format!("column `{name}` has {m} missing values"));
                }
            }
        }
    }

    ValidationReport {
        rows: n,
        missing_per_column: missing,
        constant_features,
        group_sizes,
        issues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{ColumnSchema, ColumnSpec};
    use crate::data::CandidateRecord;

    fn build(records: Vec<CandidateRecord>, features: Vec<&str>) -> Dataset {
        let mut columns = BTreeMap::from([
            (
                "id".to_string(),
                ColumnSpec {
                    role: ColumnRole::Id,
                    categories: None,
                },
            ),
            (
                "gender".to_string(),
                ColumnSpec {
                    role: ColumnRole::Protected,
                    categories: Some(vec!["F".into(), "M".into()]),
                },
            ),
        ]);
        for f in &features {
            columns.insert(
                f.to_string(),
                ColumnSpec {
                    role: ColumnRole::Feature,
                    categories: None,
                },
            );
        }
        Dataset::new(
            ColumnSchema {
                stages: vec![],
                columns,
            },
            features.iter().map(|s| s.to_string()).collect(),
            records,
        )
        .unwrap()
    }

    fn rec(id: &str, gender: Option<&str>, features: Vec<Option<f64>>) -> CandidateRecord {
        let mut protected = BTreeMap::new();
        if let Some(g) = gender {
            protected.insert("gender".to_string(), g.to_string());
        }
        CandidateRecord {
            id: id.into(),
            features,
            protected,
            ..CandidateRecord::default()
        }
    }

    #[test]
    fn flags_constant_feature() {
        let ds = build(
            vec![
                rec("a", Some("F"), vec![Some(2.0), Some(1.0)]),
                rec("b", Some("M"), vec![Some(2.0), Some(3.0)]),
            ],
            vec!["x", "y"],
        );
        let report = validate_dataset(&ds);
        assert_eq!(report.constant_features, vec!["x".to_string()]);
        assert!(report.issues.iter().any(|i| i.contains("`x` is constant")));
    }

    #[test]
    fn counts_missing_protected_values() {
        // 1 of 20 = 5% missing gender.
        let mut records: Vec<CandidateRecord> = (0..19)
            .map(|i| rec(&format!("r{i}"), Some(if i % 2 == 0 { "F" } else { "M" }), vec![]))
            .collect();
        records.push(rec("r19", None, vec![]));
        let ds = build(records, vec![]);
        let report = validate_dataset(&ds);
        assert_eq!(report.missing_per_column["gender"], 1);
        assert_eq!(report.group_sizes["gender"]["F"], 10);
        assert_eq!(report.group_sizes["gender"]["M"], 9);
    }

    #[test]
    fn clean_dataset_has_empty_issue_list() {
        let ds = build(
            vec![
                rec("a", Some("F"), vec![Some(1.0)]),
                rec("b", Some("M"), vec![Some(2.0)]),
            ],
            vec!["x"],
        );
        assert!(validate_dataset(&ds).issues.is_empty());
    }
}
