//! Linear/logistic candidate scorer.
//!
//! Every audited procedure is model-agnostic; a convex scorer keeps the
//! gradient oracles exact, so linear and logistic are the only links.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    Identity,
    Logistic,
}

pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Per-feature z-score parameters fitted on training data. Training and
/// scoring always standardize; penalty geometry and clustering both
/// assume comparable feature scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// 1.0 for constant columns (flagged at fit time).
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> (Self, Vec<usize>) {
        let p = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut means = vec![0.0; p];
        let mut stds = vec![1.0; p];
        let mut constant = Vec::new();
        for j in 0..p {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            means[j] = mean(&col);
            let var = col
                .iter()
                .map(|v| (v - means[j]) * (v - means[j]))
                .sum::<f64>()
                / n;
            if var > 0.0 {
                stds[j] = var.sqrt();
            } else {
                constant.push(j);
            }
        }
        (Standardizer { means, stds }, constant)
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| (v - self.means[j]) / self.stds[j])
            .collect()
    }
}

/// f(X): weights over standardized features, plus a link.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoringModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub link: Link,
    pub standardization: Standardizer,
}

impl ScoringModel {
    /// Pre-link margin over an already-standardized row.
    pub fn margin(&self, standardized: &[f64]) -> f64 {
        debug_assert_eq!(standardized.len(), self.weights.len());
        let dot: f64 = self
            .weights
            .iter()
            .zip(standardized)
            .map(|(w, x)| w * x)
            .sum();
        dot + self.bias
    }

    pub fn apply_link(&self, u: f64) -> f64 {
        match self.link {
            Link::Identity => u,
            Link::Logistic => sigmoid(u),
        }
    }

    /// Score for every record; `None` where a model feature is missing.
    pub fn score_records(&self, dataset: &Dataset) -> Result<Vec<Option<f64>>> {
        let indices: Vec<usize> = self
            .feature_names
            .iter()
            .map(|name| {
                dataset
                    .feature_index(name)
                    .ok_or_else(|| Error::UnknownColumn(name.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(dataset
            .records
            .iter()
            .map(|rec| {
                indices
                    .iter()
                    .map(|&j| rec.features[j])
                    .collect::<Option<Vec<f64>>>()
                    .map(|raw| self.apply_link(self.margin(&self.standardization.apply(&raw))))
            })
            .collect())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!((sigmoid(700.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-700.0) > 0.0);
        for &u in &[0.3, 1.7, 9.0] {
            assert!((sigmoid(u) + sigmoid(-u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn standardizer_flags_constant_columns() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]];
        let (s, constant) = Standardizer::fit(&rows);
        assert_eq!(constant, vec![1]);
        assert_eq!(s.stds[1], 1.0);
        let z = s.apply(&[3.0, 5.0]);
        assert!((z[0]).abs() < 1e-12);
        assert!((z[1]).abs() < 1e-12);
    }

    #[test]
    fn model_json_round_trip() {
        let m = ScoringModel {
            feature_names: vec!["a".into(), "b".into()],
            weights: vec![0.25, -1.5],
            bias: 0.125,
            link: Link::Logistic,
            standardization: Standardizer {
                means: vec![0.0, 1.0],
                stds: vec![1.0, 2.0],
            },
        };
        let back = ScoringModel::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(back.weights, m.weights);
        assert_eq!(back.link, m.link);
    }
}
