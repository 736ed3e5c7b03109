//! Agreement between a clustering and the protected-group partition.
//!
//! If unsupervised structure recovers the protected groups, the features
//! leak group membership and a learner could discriminate through them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{GroupKey, GroupedView};
use crate::error::{Error, Result};
use crate::proxy::kmeans::Clustering;

/// ARI at or above this counts as leakage unless configured otherwise.
/// A constructed default, disclosed in every report; no published value
/// exists for this step.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakageVerdict {
    Leakage,
    NoLeakage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub adjusted_rand_index: f64,
    /// Fraction of records whose cluster's majority group matches their
    /// own group.
    pub purity: f64,
    pub threshold: f64,
    pub verdict: LeakageVerdict,
}

/// Chance-corrected agreement between two partitions via the standard
/// pair-counting contingency formula. Defined as 0 when either side has
/// a single block (the correction's denominator vanishes).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "partitions must cover the same records");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut contingency: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *contingency.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let choose2 = |x: f64| x * (x - 1.0) / 2.0;
    let sum_ij: f64 = contingency.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n as f64);
    if total == 0.0 {
        return 0.0;
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return 0.0;
    }
    (sum_ij - expected) / denom
}

/// Compares cluster assignments against the view's group partition.
/// `clustering.assignments[i]` must correspond to the i-th eligible
/// record of the view in ascending record order.
pub fn cluster_group_alignment(
    clustering: &Clustering,
    view: &GroupedView,
    threshold: f64,
) -> Result<AlignmentResult> {
    let membership = view.membership();
    if clustering.assignments.len() != membership.len() {
        return Err(Error::PartitionMismatch {
            clustered: clustering.assignments.len(),
            grouped: membership.len(),
        });
    }
    // Dense group ids in key order.
    let group_ids: BTreeMap<&GroupKey, usize> = view
        .groups
        .keys()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    let groups: Vec<usize> = membership.iter().map(|(_, k)| group_ids[k]).collect();
    let ari = adjusted_rand_index(&clustering.assignments, &groups);

    // Majority group per cluster; lexicographically smallest key wins a
    // tie so the result is stable.
    let mut per_cluster: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&c, &g) in clustering.assignments.iter().zip(&groups) {
        *per_cluster.entry(c).or_default().entry(g).or_default() += 1;
    }
    let majority: BTreeMap<usize, usize> = per_cluster
        .iter()
        .map(|(&c, counts)| {
            let (&g, _) = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .unwrap();
            (c, g)
        })
        .collect();
    let agree = clustering
        .assignments
        .iter()
        .zip(&groups)
        .filter(|(c, g)| majority[c] == **g)
        .count();
    let purity = agree as f64 / groups.len() as f64;

    let verdict = if ari >= threshold {
        LeakageVerdict::Leakage
    } else {
        LeakageVerdict::NoLeakage
    };
    Ok(AlignmentResult {
        adjusted_rand_index: ari,
        purity,
        threshold,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions_have_ari_one() {
        let a = vec![0, 0, 1, 1, 2, 2, 2];
        assert_eq!(adjusted_rand_index(&a, &a), 1.0);
        // Relabeling leaves it at 1.
        let b: Vec<usize> = a.iter().map(|x| (x + 5) * 3).collect();
        assert_eq!(adjusted_rand_index(&a, &b), 1.0);
    }

    #[test]
    fn single_cluster_forces_ari_zero() {
        let a = vec![0; 10];
        let b: Vec<usize> = (0..10).map(|i| i % 2).collect();
        assert_eq!(adjusted_rand_index(&a, &b), 0.0);
        assert_eq!(adjusted_rand_index(&b, &a), 0.0);
    }

    #[test]
    fn ari_is_symmetric() {
        let a = vec![0, 0, 1, 1, 1, 2, 0, 2];
        let b = vec![1, 1, 0, 0, 2, 2, 1, 0];
        assert_eq!(adjusted_rand_index(&a, &b), adjusted_rand_index(&b, &a));
    }
}
