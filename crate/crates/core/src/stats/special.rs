//! Special functions backing the distribution tails.
//!
//! Everything here is f64 and self-contained: Lanczos log-gamma, the
//! regularized incomplete beta via Lentz's continued fraction, and the
//! regularized incomplete gamma (series + continued fraction) from which
//! erf/erfc and the normal tail are derived. The F tail is the one
//! surface with a stated accuracy contract: absolute error <= 1e-9 over
//! f >= 0, df >= 1.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function, Lanczos approximation (g = 7, n = 9).
///
/// Accurate to ~1e-14 relative for z > 0.
pub fn ln_gamma(z: f64) -> f64 {
    assert!(z > 0.0, "ln_gamma requires z > 0, got {z}");
    if z < 0.5 {
        // Reflection keeps the approximation in its sweet spot.
        return (PI / (PI * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    regularized_incomplete_beta_c(a, b, x, 1.0 - x)
}

/// Regularized incomplete beta with the complement `xc = 1 - x` supplied
/// by the caller.
///
/// When x is extremely close to 0 or 1 the caller often knows the
/// complement analytically (the F tail does); using it avoids the
/// cancellation in `1.0 - x` that would otherwise dominate the error.
pub fn regularized_incomplete_beta_c(a: f64, b: f64, x: f64, xc: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if xc <= 0.0 {
        return 1.0;
    }
    let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * xc.ln();
    let bt = ln_bt.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - bt * beta_cont_frac(b, a, xc) / b
    }
}

/// Survival function of the F distribution: P(F > f) for F ~ F(df1, df2).
///
/// Computed through the regularized incomplete beta evaluated by
/// continued fraction; absolute error <= 1e-9 for f >= 0, df1, df2 >= 1.
pub fn f_tail(f: f64, df1: u64, df2: u64) -> f64 {
    assert!(df1 >= 1 && df2 >= 1, "degrees of freedom must be >= 1");
    assert!(f >= 0.0 && f.is_finite() || f.is_infinite(), "f must be >= 0");
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let d1 = df1 as f64;
    let d2 = df2 as f64;
    let denom = d2 + d1 * f;
    // Both the argument and its complement come from clean divisions.
    let x = d2 / denom;
    let xc = d1 * f / denom;
    regularized_incomplete_beta_c(d2 / 2.0, d1 / 2.0, x, xc)
}

/// Regularized lower incomplete gamma P(a, x) by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction.
fn gamma_q_cont_frac(a: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cont_frac(a, x)
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -erf(-x)
    } else {
        regularized_gamma_p(0.5, x * x)
    }
}

/// Complementary error function, accurate in the far tail.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else {
        regularized_gamma_q(0.5, x * x)
    }
}

/// Standard normal survival function P(Z > z).
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sided normal p-value for an observed z statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Survival function of the chi-square distribution with `df` degrees of
/// freedom.
pub fn chi_square_tail(x: f64, df: u64) -> f64 {
    assert!(df >= 1);
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(df as f64 / 2.0, x / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        // Gamma(1/2) = sqrt(pi), Gamma(n) = (n-1)!
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-13);
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24.0_f64.ln()).abs() < 1e-12);
        let fact_10: f64 = (1..=10u64).product::<u64>() as f64;
        assert!((ln_gamma(11.0) - fact_10.ln()).abs() < 1e-11);
    }

    #[test]
    fn incomplete_beta_boundaries_and_symmetry() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
        // I_x(a, b) = 1 - I_{1-x}(b, a)
        for &(a, b, x) in &[(2.0, 3.0, 0.3), (0.5, 0.5, 0.7), (5.0, 1.5, 0.11)] {
            let lhs = regularized_incomplete_beta(a, b, x);
            let rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
            assert!((lhs - rhs).abs() < 1e-14, "a={a} b={b} x={x}");
        }
        // I_x(1, b) = 1 - (1-x)^b in closed form.
        let x = 0.2;
        let b = 0.5;
        let closed = 1.0 - (1.0_f64 - x).powf(b);
        assert!((regularized_incomplete_beta(1.0, b, x) - closed).abs() < 1e-14);
    }

    #[test]
    fn f_tail_boundaries() {
        assert_eq!(f_tail(0.0, 3, 10), 1.0);
        assert_eq!(f_tail(f64::INFINITY, 3, 10), 0.0);
        // Ratio of two iid chi-squares has median 1: P(F > 1) = 1/2 when
        // df1 = df2 (any value; 1 exercises the half-integer branch).
        assert!((f_tail(1.0, 1, 1) - 0.5).abs() < 1e-12);
        assert!((f_tail(1.0, 4, 4) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f_tail_closed_forms() {
        // df2 = 2: SF = I_x(1, d1/2) = 1 - (1 - x)^(d1/2) with x = 2/(2+d1*f).
        // At d1 = 1, f = 8: 1 - (8/10)^(1/2).
        let expected = 1.0 - 0.8_f64.sqrt();
        assert!((f_tail(8.0, 1, 2) - expected).abs() < 1e-14);
        // d1 = d2 = 2: SF = x = 1/(1+f).
        assert!((f_tail(3.0, 2, 2) - 0.25).abs() < 1e-13);
    }

    #[test]
    fn f_tail_monotone_in_f() {
        let mut last = 1.0;
        for i in 0..200 {
            let f = i as f64 * 0.25;
            let p = f_tail(f, 3, 17);
            assert!(p <= last + 1e-15, "not monotone at f={f}");
            last = p;
        }
    }

    #[test]
    fn erf_and_normal_known_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-12);
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-12);
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_sf(1.959_963_984_540_054) - 0.025).abs() < 1e-9);
        assert!((erf(-1.0) + erf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn chi_square_matches_erfc_for_one_dof() {
        // Q_{chi2(1)}(z^2) = erfc(|z|/sqrt(2)) exactly in the math; the two
        // code paths share the gamma machinery so agreement is tight.
        for &z in &[0.1, 0.5, 1.0, 2.0, 3.5] {
            let lhs = chi_square_tail(z * z, 1);
            let rhs = erfc(z / std::f64::consts::SQRT_2);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }
}
