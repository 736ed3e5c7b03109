//! Marginal feature/group association: point-biserial correlation for
//! two groups, correlation ratio (eta) for more.

use serde::{Deserialize, Serialize};

use crate::data::{derive_groups, Dataset, GroupingScheme};
use crate::error::Result;
use crate::numeric::{mean, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationKind {
    /// Signed, in [-1, 1]; two groups.
    PointBiserial,
    /// Unsigned, in [0, 1]; any group count.
    CorrelationRatio,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssociationRow {
    pub feature: String,
    pub attribute: String,
    pub statistic: f64,
    pub kind: AssociationKind,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Per-feature association against one grouping, ranked by magnitude.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssociationTable {
    pub rows: Vec<AssociationRow>,
}

impl AssociationTable {
    pub fn row_for(&self, feature: &str) -> Option<&AssociationRow> {
        self.rows.iter().find(|r| r.feature == feature)
    }
}

/// Point-biserial correlation of values against a binary indicator:
/// Pearson correlation with the 0/1 group membership.
fn point_biserial(values: &[f64], indicator: &[bool]) -> f64 {
    let n = values.len() as f64;
    let m = mean(values);
    let n1 = indicator.iter().filter(|b| **b).count() as f64;
    let n0 = n - n1;
    if n0 == 0.0 || n1 == 0.0 {
        return 0.0;
    }
    let m1 = mean(
        &values
            .iter()
            .zip(indicator)
            .filter(|(_, b)| **b)
            .map(|(v, _)| *v)
            .collect::<Vec<f64>>(),
    );
    let m0 = mean(
        &values
            .iter()
            .zip(indicator)
            .filter(|(_, b)| !**b)
            .map(|(v, _)| *v)
            .collect::<Vec<f64>>(),
    );
    let var = pairwise_sum(&values.iter().map(|v| (v - m) * (v - m)).collect::<Vec<f64>>()) / n;
    if var == 0.0 {
        return 0.0;
    }
    (m1 - m0) / var.sqrt() * (n1 * n0 / (n * n)).sqrt()
}

/// Correlation ratio eta: sqrt(SSB / SST) of values across groups.
fn correlation_ratio(groups: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = mean(&all);
    let sst = pairwise_sum(&all.iter().map(|v| (v - grand) * (v - grand)).collect::<Vec<f64>>());
    if sst == 0.0 {
        return 0.0;
    }
    let ssb = pairwise_sum(
        &groups
            .iter()
            .map(|g| {
                let m = mean(g);
                g.len() as f64 * (m - grand) * (m - grand)
            })
            .collect::<Vec<f64>>(),
    );
    (ssb / sst).sqrt()
}

/// One association row per feature against the scheme's grouping,
/// ranked by |statistic| descending. Constant features get statistic 0
/// and a flag.
pub fn feature_group_association(
    dataset: &Dataset,
    scheme: &GroupingScheme,
) -> Result<AssociationTable> {
    let view = derive_groups(dataset, scheme, 1)?;
    let attribute = scheme.label();
    let mut rows = Vec::new();
    for (j, feature) in dataset.feature_names.iter().enumerate() {
        let mut flags = Vec::new();
        // Per-feature pairwise deletion: grouped records with this
        // feature present.
        let mut groups: Vec<Vec<f64>> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut indicator: Vec<bool> = Vec::new();
        for (g, (_, indices)) in view.groups.iter().enumerate() {
            let vals: Vec<f64> = indices
                .iter()
                .filter_map(|&i| dataset.records[i].features[j])
                .collect();
            for v in &vals {
                values.push(*v);
                indicator.push(g == 1);
            }
            if !vals.is_empty() {
                groups.push(vals);
            }
        }
        let (statistic, kind) = if groups.len() < 2 {
            flags.push("fewer than 2 groups with data".into());
            (0.0, AssociationKind::CorrelationRatio)
        } else if values.iter().all(|v| *v == values[0]) {
            flags.push("constant feature".into());
            let kind = if view.n_groups() == 2 {
                AssociationKind::PointBiserial
            } else {
                AssociationKind::CorrelationRatio
            };
            (0.0, kind)
        } else if view.n_groups() == 2 {
            (point_biserial(&values, &indicator), AssociationKind::PointBiserial)
        } else {
            (correlation_ratio(&groups), AssociationKind::CorrelationRatio)
        };
        rows.push(AssociationRow {
            feature: feature.clone(),
            attribute: attribute.clone(),
            statistic,
            kind,
            rank: 0,
            flags,
        });
    }
    rows.sort_by(|a, b| {
        b.statistic
            .abs()
            .partial_cmp(&a.statistic.abs())
            .unwrap()
            .then_with(|| a.feature.cmp(&b.feature))
    });
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(AssociationTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CandidateRecord, ColumnRole, ColumnSchema, ColumnSpec, Dataset};
    use std::collections::BTreeMap;

    pub(crate) fn feature_dataset(
        genders: &[&str],
        features: Vec<(&str, Vec<f64>)>,
    ) -> Dataset {
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
                    categories: Some(vec!["A".into(), "B".into(), "C".into()]),
                },
            ),
        ]);
        for (name, _) in &features {
            columns.insert(
                name.to_string(),
                ColumnSpec {
                    role: ColumnRole::Feature,
                    categories: None,
                },
            );
        }
        let feature_names: Vec<String> = features.iter().map(|(n, _)| n.to_string()).collect();
        let records = genders
            .iter()
            .enumerate()
            .map(|(i, g)| CandidateRecord {
                id: format!("r{i}"),
                features: features.iter().map(|(_, vals)| Some(vals[i])).collect(),
                protected: BTreeMap::from([("gender".to_string(), g.to_string())]),
                ..CandidateRecord::default()
            })
            .collect();
        Dataset::new(
            ColumnSchema {
                stages: vec![],
                columns,
            },
            feature_names,
            records,
        )
        .unwrap()
    }

    #[test]
    fn exact_copy_of_group_label_has_point_biserial_one() {
        // Group keys sort A < B; the indicator marks B, so a feature
        // equal to 1 for B and 0 for A is a perfect positive proxy.
        let genders = ["A", "B", "A", "B", "A", "B"];
        let copy: Vec<f64> = genders.iter().map(|g| (*g == "B") as u8 as f64).collect();
        let ds = feature_dataset(&genders, vec![("proxy", copy)]);
        let table = feature_group_association(&ds, &GroupingScheme::single("gender")).unwrap();
        let row = table.row_for("proxy").unwrap();
        assert_eq!(row.kind, AssociationKind::PointBiserial);
        assert!((row.statistic - 1.0).abs() < 1e-12, "{}", row.statistic);
    }

    #[test]
    fn constant_feature_is_zero_and_flagged() {
        let genders = ["A", "B", "A", "B"];
        let ds = feature_dataset(&genders, vec![("flat", vec![3.0; 4])]);
        let table = feature_group_association(&ds, &GroupingScheme::single("gender")).unwrap();
        let row = table.row_for("flat").unwrap();
        assert_eq!(row.statistic, 0.0);
        assert!(row.flags.iter().any(|f| f.contains("constant")));
    }

    #[test]
    fn correlation_ratio_for_three_groups() {
        // Three groups at distinct constant levels: eta = 1.
        let genders = ["A", "A", "B", "B", "C", "C"];
        let vals = vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        let ds = feature_dataset(&genders, vec![("lvl", vals)]);
        let table = feature_group_association(&ds, &GroupingScheme::single("gender")).unwrap();
        let row = table.row_for("lvl").unwrap();
        assert_eq!(row.kind, AssociationKind::CorrelationRatio);
        assert!((row.statistic - 1.0).abs() < 1e-12);
    }
}
