//! Role profiles: cluster top performers' trait vectors, take the
//! dominant cluster's centroid as the reference profile, and score
//! candidate fit against it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::squared_distance;
use crate::proxy::{kmeans, KMeansConfig};

pub const DEFAULT_FIT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleProfileConfig {
    pub k: usize,
    pub seed: u64,
    /// Score at or above this categorizes a candidate as in-group.
    pub fit_threshold: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl RoleProfileConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        RoleProfileConfig {
            k,
            seed,
            fit_threshold: DEFAULT_FIT_THRESHOLD,
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

/// Representative trait values for a role, derived from reference
/// workers by unsupervised clustering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleProfile {
    pub centroid: Vec<f64>,
    pub trait_names: Vec<String>,
    /// Sizes of every source cluster, largest first not guaranteed —
    /// indexed by cluster id.
    pub cluster_sizes: Vec<usize>,
    /// Mean distance of the chosen cluster's members to its centroid;
    /// the fit score's length scale.
    pub sigma: f64,
    pub fit_threshold: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitScore {
    pub score: f64,
    pub in_group: bool,
}

/// Clusters worker trait vectors and takes the largest cluster's
/// centroid as the profile. A size tie goes to the centroid with the
/// smaller norm (then the lower cluster id), so repeated runs agree.
pub fn build_role_profile(
    worker_traits: &[Vec<f64>],
    trait_names: &[String],
    config: &RoleProfileConfig,
) -> Result<RoleProfile> {
    if worker_traits.len() < config.k {
        return Err(Error::KMeans(format!(
            "need at least k = {} workers, got {}",
            config.k,
            worker_traits.len()
        )));
    }
    let clustering = kmeans(
        worker_traits,
        &KMeansConfig {
            k: config.k,
            seed: config.seed,
            max_iter: config.max_iter,
            tol: config.tol,
        },
    )?;
    let mut sizes = vec![0usize; config.k];
    for &c in &clustering.assignments {
        sizes[c] += 1;
    }
    let norm = |c: usize| -> f64 {
        clustering.centroids[c]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    };
    let chosen = (0..config.k)
        .max_by(|&a, &b| {
            sizes[a]
                .cmp(&sizes[b])
                .then_with(|| norm(b).partial_cmp(&norm(a)).unwrap())
                .then_with(|| b.cmp(&a))
        })
        .expect("k >= 1");

    let members: Vec<&Vec<f64>> = worker_traits
        .iter()
        .zip(&clustering.assignments)
        .filter(|(_, &c)| c == chosen)
        .map(|(t, _)| t)
        .collect();
    let centroid = clustering.centroids[chosen].clone();
    let sigma = members
        .iter()
        .map(|t| squared_distance(t, &centroid).sqrt())
        .sum::<f64>()
        / members.len() as f64;

    Ok(RoleProfile {
        centroid,
        trait_names: trait_names.to_vec(),
        cluster_sizes: sizes,
        sigma,
        fit_threshold: config.fit_threshold,
    })
}

/// Gaussian fit score exp(−‖t − centroid‖² / (2σ²)) in [0, 1], with the
/// in/out-of-group categorization at the profile's threshold. A
/// degenerate cluster (σ = 0) scores 1 on an exact match and 0 otherwise.
pub fn fit_score(candidate_traits: &[f64], profile: &RoleProfile) -> Result<FitScore> {
    if candidate_traits.len() != profile.centroid.len() {
        return Err(Error::Training(format!(
            "candidate has {} traits, profile expects {}",
            candidate_traits.len(),
            profile.centroid.len()
        )));
    }
    let d2 = squared_distance(candidate_traits, &profile.centroid);
    let score = if profile.sigma == 0.0 {
        if d2 == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (-d2 / (2.0 * profile.sigma * profile.sigma)).exp()
    };
    Ok(FitScore {
        score,
        in_group: score >= profile.fit_threshold,
    })
}

/// Plain weighted mean of per-test scores. Exposed as the obvious
/// aggregation of individual test scores; not claimed to be any
/// vendor's production formula.
pub fn weighted_sum_aggregate(scores: &[f64], weights: &[f64]) -> Result<f64> {
    if scores.len() != weights.len() || scores.is_empty() {
        return Err(Error::InvalidConfig(
            "scores and weights must be equal-length and non-empty".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidConfig("weights must sum to > 0".into()));
    }
    Ok(scores.iter().zip(weights).map(|(s, w)| s * w).sum::<f64>() / total)
}
