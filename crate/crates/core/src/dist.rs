//! Chi-square and normal distribution numerics.
//!
//! Implemented in-repo (log-gamma, regularized incomplete gamma, erf via the
//! incomplete gamma, quantiles by guarded Newton) so the statistical core has
//! no external distribution dependency. Accuracy target: relative error below
//! 1e-10 on the ranges exercised by the tests.

use crate::error::{Error, Result};

/// Lanczos approximation (g = 7, 9 terms), valid for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_cf(a, x)
    }
}

// Series expansion for P(a, x), x < a + 1.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (a * x.ln() - x - ln_gamma(a)).exp()
}

// Continued fraction (modified Lentz) for Q(a, x), x >= a + 1.
fn upper_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::Domain(format!("chi2 df must be >= 1, got {df}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(reg_lower_gamma(df as f64 / 2.0, x / 2.0))
}

/// Chi-square quantile: the unique x with `chi2_cdf(x, df) = p`.
pub fn chi2_quantile(p: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::Domain(format!("chi2 df must be >= 1, got {df}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "quantile probability must lie in (0,1), got {p}"
        )));
    }
    let k = df as f64;
    // Wilson-Hilferty starting point.
    let z = normal_quantile(p)?;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    let mut x = (k * t * t * t).max(1e-10);
    // Guarded Newton on the CDF; the density is the derivative.
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let f = chi2_cdf(x, df)? - p;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let ln_pdf = (k / 2.0 - 1.0) * x.ln()
            - x / 2.0
            - (k / 2.0) * std::f64::consts::LN_2
            - ln_gamma(k / 2.0);
        let pdf = ln_pdf.exp();
        let step = f / pdf.max(1e-300);
        let mut next = x - step;
        if !(next > lo && (hi.is_infinite() || next < hi)) {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                lo * 2.0 + 1.0
            };
        }
        if (next - x).abs() <= 1e-14 * x.abs() + 1e-300 {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Standard normal CDF via the incomplete gamma identity
/// `Phi(x) = (1 + sgn(x) P(1/2, x^2/2)) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let p = reg_lower_gamma(0.5, x * x / 2.0);
    if x > 0.0 {
        0.5 * (1.0 + p)
    } else {
        0.5 * (1.0 - p)
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile. Acklam's rational initial guess refined with two
/// Halley steps against `normal_cdf`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "quantile probability must lie in (0,1), got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..3 {
        let e = normal_cdf(x) - p;
        let u = e / normal_pdf(x);
        x -= u / (1.0 + x * u / 2.0);
    }
    Ok(x)
}
