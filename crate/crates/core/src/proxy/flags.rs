//! Combined proxy-feature evidence: marginal association plus
//! leave-one-feature-out clustering.
//!
//! How the feature/group correlation "can be discovered" is left open by
//! the procedures this audits, so both signals are computed and reported
//! separately: a feature is implicated by its marginal association with
//! the groups and by how much removing it reduces the cluster-group ARI.

use serde::{Deserialize, Serialize};

use crate::data::{derive_groups, Dataset, GroupingScheme};
use crate::error::{Error, Result};
use crate::numeric::mean;
use crate::proxy::alignment::{cluster_group_alignment, DEFAULT_LEAKAGE_THRESHOLD};
use crate::proxy::association::feature_group_association;
use crate::proxy::kmeans::{kmeans, KMeansConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyFlagConfig {
    /// Cluster count; defaults to the number of protected groups, since
    /// recovering exactly those groups is what the check probes.
    pub k: Option<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// |association| at or above this implicates a feature on its own.
    pub association_threshold: f64,
    /// Leave-one-out ARI drop at or above this implicates a feature.
    pub ari_drop_threshold: f64,
    /// Cluster-group ARI at or above this is reported as leakage.
    pub leakage_threshold: f64,
}

impl Default for ProxyFlagConfig {
    fn default() -> Self {
        ProxyFlagConfig {
            k: None,
            seed: 0,
            max_iter: 200,
            tol: 1e-8,
            association_threshold: 0.2,
            ari_drop_threshold: 0.05,
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
        }
    }
}

/// Evidence for one feature. JSON shape: {feature, association,
/// loo_ari_drop, rank}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyEvidence {
    pub feature: String,
    pub association: f64,
    pub loo_ari_drop: f64,
    pub rank: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyFlagReport {
    /// Ordered by combined evidence, strongest first.
    pub evidence: Vec<ProxyEvidence>,
    /// Features over either threshold, in rank order.
    pub flagged: Vec<String>,
    /// Cluster-group ARI with all features present.
    pub baseline_ari: f64,
    pub baseline_purity: f64,
    pub leakage: bool,
    /// Records skipped for missing feature values.
    pub excluded_incomplete: usize,
    pub k: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// z-scores each column over the rows; a zero-spread column becomes all
/// zeros. Unstandardized distances would let feature scale decide the
/// clusters.
pub fn standardize_columns(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let p = rows[0].len();
    let n = rows.len() as f64;
    let mut means = vec![0.0; p];
    let mut stds = vec![0.0; p];
    for j in 0..p {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        means[j] = mean(&col);
        let var = col.iter().map(|v| (v - means[j]) * (v - means[j])).sum::<f64>() / n;
        stds[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, v)| (v - means[j]) / stds[j])
                .collect()
        })
        .collect()
}

/// Ranks every feature by combined proxy evidence (|association| plus
/// positive leave-one-out ARI drop) against one grouping scheme.
///
/// Clustering input is exactly the feature columns — never protected
/// attributes, labels, scores, or outcomes.
pub fn flag_proxy_features(
    dataset: &Dataset,
    scheme: &GroupingScheme,
    config: &ProxyFlagConfig,
) -> Result<ProxyFlagReport> {
    let view = derive_groups(dataset, scheme, 1)?;
    let p = dataset.feature_names.len();
    if p == 0 {
        return Err(Error::KMeans("dataset has no feature columns".into()));
    }

    // Complete rows only, in eligible-record order so clustering lines
    // up with the view positionally.
    let eligible = view.eligible_indices();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for &i in &eligible {
        if let Some(row) = dataset.records[i]
            .features
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
        {
            rows.push(row);
            kept.push(i);
        }
    }
    let excluded_incomplete = eligible.len() - kept.len();
    let k = config.k.unwrap_or(view.n_groups());
    if rows.len() < k.max(2) {
        return Err(Error::KMeans(format!(
            "only {} complete records for k = {k}",
            rows.len()
        )));
    }

    // Restrict the view to the records actually clustered.
    let mut sub_view = view.clone();
    for indices in sub_view.groups.values_mut() {
        indices.retain(|i| kept.contains(i));
    }
    sub_view.groups.retain(|_, v| !v.is_empty());

    let km_config = KMeansConfig {
        k,
        seed: config.seed,
        max_iter: config.max_iter,
        tol: config.tol,
    };
    let standardized = standardize_columns(&rows);
    let baseline_clustering = kmeans(&standardized, &km_config)?;
    let baseline = cluster_group_alignment(&baseline_clustering, &sub_view, config.leakage_threshold)?;

    let association = feature_group_association(dataset, scheme)?;

    let mut warnings = Vec::new();
    if excluded_incomplete > 0 {
        warnings.push(format!(
            "{excluded_incomplete} records skipped for missing feature values"
        ));
    }

    let mut evidence = Vec::with_capacity(p);
    for (j, feature) in dataset.feature_names.iter().enumerate() {
        let loo_ari = if p == 1 {
            // Removing the only feature removes all structure.
            0.0
        } else {
            let reduced: Vec<Vec<f64>> = standardized
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(jj, _)| *jj != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let clustering = kmeans(&reduced, &km_config)?;
            cluster_group_alignment(&clustering, &sub_view, config.leakage_threshold)?
                .adjusted_rand_index
        };
        let assoc = association
            .row_for(feature)
            .map(|r| r.statistic)
            .unwrap_or(0.0);
        let drop = baseline.adjusted_rand_index - loo_ari;
        evidence.push(ProxyEvidence {
            feature: feature.clone(),
            association: assoc,
            loo_ari_drop: drop,
            rank: 0,
            flagged: assoc.abs() >= config.association_threshold
                || drop >= config.ari_drop_threshold,
        });
    }
    evidence.sort_by(|a, b| {
        let ca = a.association.abs() + a.loo_ari_drop.max(0.0);
        let cb = b.association.abs() + b.loo_ari_drop.max(0.0);
        cb.partial_cmp(&ca)
            .unwrap()
            .then_with(|| a.feature.cmp(&b.feature))
    });
    for (i, e) in evidence.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    let flagged: Vec<String> = evidence
        .iter()
        .filter(|e| e.flagged)
        .map(|e| e.feature.clone())
        .collect();

    Ok(ProxyFlagReport {
        flagged,
        leakage: baseline.adjusted_rand_index >= config.leakage_threshold,
        baseline_ari: baseline.adjusted_rand_index,
        baseline_purity: baseline.purity,
        evidence,
        excluded_incomplete,
        k,
        seed: config.seed,
        warnings,
    })
}
