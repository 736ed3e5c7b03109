//! One-way ANOVA.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean, pairwise_sum};
use crate::stats::special::f_tail;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: u64,
    pub df_within: u64,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// F = (SSB/(k-1)) / (SSW/(N-k)) with the p-value from the F tail.
///
/// Degenerate cases follow fixed conventions: all values identical gives
/// F = 0, p = 1; zero within-group variance with real between-group
/// spread is an infinite F reported as p = 0 with a warning.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::InvalidTestInput {
            test: "one_way_anova",
            requirement: format!("at least 2 groups (got {k})"),
        });
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::InvalidTestInput {
                test: "one_way_anova",
                requirement: format!("at least 2 samples per group (group {i} has {})", g.len()),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTestInput {
                test: "one_way_anova",
                requirement: format!("finite samples (group {i})"),
            });
        }
    }
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let df_between = (k - 1) as u64;
    let df_within = (n_total - k) as u64;

    let group_means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand_mean = mean(&all);

    let ssb = pairwise_sum(
        &groups
            .iter()
            .zip(&group_means)
            .map(|(g, m)| g.len() as f64 * (m - grand_mean) * (m - grand_mean))
            .collect::<Vec<f64>>(),
    );
    let ssw = pairwise_sum(
        &groups
            .iter()
            .zip(&group_means)
            .map(|(g, m)| pairwise_sum(&g.iter().map(|v| (v - m) * (v - m)).collect::<Vec<f64>>()))
            .collect::<Vec<f64>>(),
    );

    if ssw == 0.0 {
        if ssb == 0.0 {
            // Every value identical everywhere.
            return Ok(AnovaResult {
                f_stat: 0.0,
                df_between,
                df_within,
                p_value: 1.0,
                warnings: vec!["all samples identical; F = 0 by convention".into()],
            });
        }
        return Ok(AnovaResult {
            f_stat: f64::INFINITY,
            df_between,
            df_within,
            p_value: 0.0,
            warnings: vec![
                "zero within-group variance with nonzero between-group spread; infinite F reported as p = 0"
                    .into(),
            ],
        });
    }

    let f_stat = (ssb / df_between as f64) / (ssw / df_within as f64);
    let p_value = f_tail(f_stat, df_between, df_within);
    Ok(AnovaResult {
        f_stat,
        df_between,
        df_within,
        p_value,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups_give_f_zero_p_one() {
        let r = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(r.f_stat, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df_between, 1);
        assert_eq!(r.df_within, 4);
    }

    #[test]
    fn hand_computed_f_of_eight() {
        // {1,2} vs {3,4}: SSB = 4, SSW = 1, F = (4/1)/(1/2) = 8.
        let r = one_way_anova(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((r.f_stat - 8.0).abs() < 1e-12);
        assert_eq!(r.df_between, 1);
        assert_eq!(r.df_within, 2);
        // SF of F(1,2) at 8 = 1 - sqrt(8/10) in closed form.
        let expected_p = 1.0 - (0.8f64).sqrt();
        assert!((r.p_value - expected_p).abs() < 1e-12);
    }

    #[test]
    fn degenerate_within_variance_reports_infinite_f() {
        let r = one_way_anova(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(r.f_stat.is_infinite());
        assert_eq!(r.p_value, 0.0);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn rejects_undersized_input() {
        assert!(one_way_anova(&[vec![1.0, 2.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0], vec![2.0, 3.0]]).is_err());
    }
}
