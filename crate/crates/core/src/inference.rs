//! Hypothesis tests and confidence intervals on contrast estimates.

use crate::dist::{chi2_cdf, chi2_quantile, normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::linalg::{pinv_sym, Mat};

/// Condition number above which a pseudo-inverted test matrix earns a
/// warning.
const CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    /// Chi-square degrees of freedom; `None` for normal tests.
    pub df: Option<usize>,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub method: String,
    pub critical_value: f64,
    pub warnings: Vec<String>,
}

/// Wald test of `psi * delta = delta0` using a contrast variance on the
/// root-n scale: `T = n (psi d - delta0)' (psi V psi')^+ (psi d - delta0)`,
/// compared to the chi-square quantile with df = rows of psi.
pub fn wald_test(
    delta: &[f64],
    v_contrast: &Mat,
    psi: &Mat,
    delta0: &[f64],
    n: f64,
    alpha: f64,
) -> Result<TestResult> {
    let ell = psi.nrows();
    if psi.ncols() != delta.len() {
        return Err(Error::Dimension(format!(
            "psi has {} columns but the estimate has length {}",
            psi.ncols(),
            delta.len()
        )));
    }
    if delta0.len() != ell {
        return Err(Error::LengthMismatch {
            context: "null vector",
            expected: ell,
            got: delta0.len(),
        });
    }
    if v_contrast.nrows() != delta.len() || v_contrast.ncols() != delta.len() {
        return Err(Error::Dimension(
            "contrast variance does not match the estimate".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    // full row rank check via the Gram matrix of psi
    let gram = psi.matmul(&psi.transpose())?;
    let (_, gram_info) = pinv_sym(&gram, 1e-12)?;
    if gram_info.rank < ell {
        return Err(Error::RankDeficient(format!(
            "psi has rank {} but {} rows",
            gram_info.rank, ell
        )));
    }

    let mut warnings = Vec::new();
    let projected = psi.matmul(v_contrast)?.matmul(&psi.transpose())?;
    if projected.max_abs() == 0.0 {
        return Err(Error::DegenerateVariance(
            "projected contrast variance is identically zero".into(),
        ));
    }
    let (inv, info) = pinv_sym(&projected, 1e-12)?;
    if info.clipped {
        warnings.push(format!(
            "projected variance is singular (rank {}); pseudo-inverse used, df kept at {}",
            info.rank, ell
        ));
    } else if info.condition > CONDITION_WARN {
        warnings.push(format!(
            "projected variance is ill-conditioned (condition {:.3e})",
            info.condition
        ));
    }

    let centered: Vec<f64> = psi
        .matvec(delta)?
        .iter()
        .zip(delta0)
        .map(|(a, b)| a - b)
        .collect();
    let statistic = n * inv.quad_form(&centered)?;
    let critical_value = chi2_quantile(1.0 - alpha, ell)?;
    let p_value = 1.0 - chi2_cdf(statistic, ell)?;
    Ok(TestResult {
        statistic,
        df: Some(ell),
        p_value,
        reject: statistic > critical_value,
        alpha,
        method: "wald-chi2".into(),
        critical_value,
        warnings,
    })
}

/// Two-sided normal test of `estimate = delta0` given a variance on the
/// root-n scale: `T = (estimate - delta0) / sqrt(variance / n)`.
pub fn t_test(
    estimate: f64,
    variance_sqrtn: f64,
    n: f64,
    delta0: f64,
    alpha: f64,
) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if variance_sqrtn <= 0.0 {
        return Err(Error::DegenerateVariance(format!(
            "non-positive variance {variance_sqrtn}"
        )));
    }
    let se = (variance_sqrtn / n).sqrt();
    let statistic = (estimate - delta0) / se;
    let critical_value = normal_quantile(1.0 - alpha / 2.0)?;
    let p_value = 2.0 * (1.0 - normal_cdf(statistic.abs()));
    Ok(TestResult {
        statistic,
        df: None,
        p_value,
        reject: statistic.abs() > critical_value,
        alpha,
        method: "t-normal".into(),
        critical_value,
        warnings: Vec::new(),
    })
}

/// Two-sided normal confidence interval on the same scale conventions as
/// `t_test`.
pub fn confidence_interval(
    estimate: f64,
    variance_sqrtn: f64,
    n: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if variance_sqrtn < 0.0 {
        return Err(Error::DegenerateVariance(format!(
            "negative variance {variance_sqrtn}"
        )));
    }
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let half = z * (variance_sqrtn / n).sqrt();
    Ok((estimate - half, estimate + half))
}
