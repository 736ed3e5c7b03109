//! Two-sample Hotelling's T².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::special::f_tail;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hotelling2Result {
    pub t2: f64,
    pub f_stat: f64,
    /// Numerator degrees of freedom: the dimension p.
    pub df1: u64,
    /// Denominator degrees of freedom: n1 + n2 - p - 1.
    pub df2: u64,
    pub p_value: f64,
    /// Spectral condition estimate of the pooled covariance (ratio of
    /// extreme Cholesky pivots squared).
    pub condition_estimate: f64,
}

/// T² = (n1·n2/(n1+n2)) · d' S⁻¹ d over the pooled covariance S, with
/// the F conversion F = T²·(n1+n2-p-1)/(p·(n1+n2-2)).
///
/// S⁻¹d is obtained by a Cholesky solve, not an explicit inverse; a
/// failed pivot means a singular pooled covariance and the offending
/// dimension is named in the error.
pub fn hotelling_t2(sample_a: &[Vec<f64>], sample_b: &[Vec<f64>]) -> Result<Hotelling2Result> {
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidTestInput {
            test: "hotelling_t2",
            requirement: format!("at least 2 samples per group (got {n1}, {n2})"),
        });
    }
    let p = sample_a[0].len();
    if p == 0
        || sample_a.iter().any(|r| r.len() != p)
        || sample_b.iter().any(|r| r.len() != p)
    {
        return Err(Error::InvalidTestInput {
            test: "hotelling_t2",
            requirement: "consistent nonzero dimension across all rows".into(),
        });
    }
    if n1 + n2 < p + 2 {
        return Err(Error::InvalidTestInput {
            test: "hotelling_t2",
            requirement: format!("n1 + n2 >= p + 2 (got {} vs {})", n1 + n2, p + 2),
        });
    }

    let mean_a = column_means(sample_a);
    let mean_b = column_means(sample_b);
    let diff: Vec<f64> = mean_a.iter().zip(&mean_b).map(|(a, b)| a - b).collect();

    // Pooled covariance: ((n1-1) S_a + (n2-1) S_b) / (n1 + n2 - 2),
    // where (n-1) S is the centered cross-product matrix.
    let mut pooled = scatter_matrix(sample_a, &mean_a);
    let scatter_b = scatter_matrix(sample_b, &mean_b);
    let denom = (n1 + n2 - 2) as f64;
    for i in 0..p {
        for j in 0..p {
            pooled[i][j] = (pooled[i][j] + scatter_b[i][j]) / denom;
        }
    }

    let chol = cholesky(&pooled)?;
    let solved = chol.solve(&diff);
    let t2 = (n1 * n2) as f64 / (n1 + n2) as f64
        * diff.iter().zip(&solved).map(|(d, s)| d * s).sum::<f64>();
    // A tiny negative from rounding, never a real one.
    let t2 = t2.max(0.0);

    let df1 = p as u64;
    let df2 = (n1 + n2 - p - 1) as u64;
    let f_stat = t2 * df2 as f64 / (df1 as f64 * (n1 + n2 - 2) as f64);
    let p_value = f_tail(f_stat, df1, df2);

    let max_pivot = chol.pivots.iter().cloned().fold(f64::MIN, f64::max);
    let min_pivot = chol.pivots.iter().cloned().fold(f64::MAX, f64::min);
    Ok(Hotelling2Result {
        t2,
        f_stat,
        df1,
        df2,
        p_value,
        condition_estimate: (max_pivot / min_pivot).powi(2),
    })
}

pub(crate) fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    let p = rows[0].len();
    let n = rows.len() as f64;
    let mut means = vec![0.0; p];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    means
}

fn scatter_matrix(rows: &[Vec<f64>], means: &[f64]) -> Vec<Vec<f64>> {
    let p = means.len();
    let mut s = vec![vec![0.0; p]; p];
    for row in rows {
        for i in 0..p {
            let di = row[i] - means[i];
            for j in i..p {
                s[i][j] += di * (row[j] - means[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            s[i][j] = s[j][i];
        }
    }
    s
}

struct Cholesky {
    /// Lower-triangular factor, row-major.
    l: Vec<Vec<f64>>,
    /// Diagonal of L.
    pivots: Vec<f64>,
}

/// Cholesky factorization of a symmetric positive-definite matrix.
/// A non-positive pivot surfaces as `SingularCovariance` carrying the
/// dimension where elimination broke down.
fn cholesky(a: &[Vec<f64>]) -> Result<Cholesky> {
    let p = a.len();
    let mut l = vec![vec![0.0; p]; p];
    let scale: f64 = (0..p).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(1e-300);
    let tol = scale * 1e-12;
    let mut pivots = Vec::with_capacity(p);
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= tol {
                    return Err(Error::SingularCovariance { dims: vec![i] });
                }
                l[i][j] = sum.sqrt();
                pivots.push(l[i][j]);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(Cholesky { l, pivots })
}

impl Cholesky {
    /// Solves A x = b via forward + back substitution.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = b.len();
        let mut y = vec![0.0; p];
        for i in 0..p {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[i][k] * y[k];
            }
            y[i] = sum / self.l[i][i];
        }
        let mut x = vec![0.0; p];
        for i in (0..p).rev() {
            let mut sum = y[i];
            for k in i + 1..p {
                sum -= self.l[k][i] * x[k];
            }
            x[i] = sum / self.l[i][i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_t2_zero_p_one() {
        let a = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![0.0, 0.5],
            vec![1.5, -1.0],
        ];
        let r = hotelling_t2(&a, &a).unwrap();
        assert_eq!(r.t2, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df1, 2);
        assert_eq!(r.df2, 8 - 2 - 1);
    }

    #[test]
    fn univariate_case_equals_squared_pooled_t() {
        let a: Vec<Vec<f64>> = [1.2, 0.7, 1.9, 0.4, 1.1].iter().map(|v| vec![*v]).collect();
        let b: Vec<Vec<f64>> = [2.0, 2.2, 1.4, 2.8].iter().map(|v| vec![*v]).collect();
        let r = hotelling_t2(&a, &b).unwrap();

        // Pooled two-sample t, squared.
        let xs: Vec<f64> = a.iter().map(|v| v[0]).collect();
        let ys: Vec<f64> = b.iter().map(|v| v[0]).collect();
        let (n1, n2) = (xs.len() as f64, ys.len() as f64);
        let m1 = xs.iter().sum::<f64>() / n1;
        let m2 = ys.iter().sum::<f64>() / n2;
        let ss1: f64 = xs.iter().map(|x| (x - m1) * (x - m1)).sum();
        let ss2: f64 = ys.iter().map(|y| (y - m2) * (y - m2)).sum();
        let pooled_var = (ss1 + ss2) / (n1 + n2 - 2.0);
        let t = (m1 - m2) / (pooled_var * (1.0 / n1 + 1.0 / n2)).sqrt();
        assert!((r.t2 - t * t).abs() < 1e-10 * t * t);
    }

    #[test]
    fn singular_covariance_names_dimension() {
        // Second column is an exact copy of the first.
        let a: Vec<Vec<f64>> = [1.0, 2.0, 3.0].iter().map(|v| vec![*v, *v]).collect();
        let b: Vec<Vec<f64>> = [4.0, 5.0, 6.0].iter().map(|v| vec![*v, *v]).collect();
        match hotelling_t2(&a, &b) {
            Err(Error::SingularCovariance { dims }) => assert_eq!(dims, vec![1]),
            other => panic!("expected singular covariance, got {other:?}"),
        }
    }

    #[test]
    fn rejects_undersized_samples() {
        let a = vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 0.0]];
        let b = vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]];
        // n1 + n2 = 4 < p + 2 = 5.
        assert!(hotelling_t2(&a, &b).is_err());
    }
}
