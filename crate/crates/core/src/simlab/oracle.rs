//! Analytic asymptotic variances for the factorial generative models,
//! evaluated by normal-expectation quadrature. These back the acceptance
//! tests and never feed the estimators themselves.

use crate::error::{Error, Result};
use crate::estimate::{main_effect_contrast, Contrast};
use crate::linalg::Mat;
use crate::simlab::dgp::Dgp;
use crate::simlab::quad::{expect_normal, integrate_phi};

/// Asymptotic variance components under the fully blocked design: a diagonal
/// conditional-variance part and a dense conditional-mean covariance part
/// scaled by the arm count.
#[derive(Debug, Clone)]
pub struct OracleVariance {
    pub v1: Vec<f64>,
    pub v2: Mat,
}

impl OracleVariance {
    pub fn full(&self) -> Mat {
        let a = self.v1.len();
        let mut m = self.v2.clone();
        for d in 0..a {
            m.set(d, d, m.get(d, d) + self.v1[d]);
        }
        m
    }

    pub fn contrast(&self, nu: &Contrast) -> Result<Mat> {
        nu.project(&self.full())
    }
}

fn require_factorial(dgp: &Dgp) -> Result<()> {
    match dgp {
        Dgp::Factorial { .. } => Ok(()),
        Dgp::CalibratedLinear { .. } => Err(Error::InvalidArgument(
            "analytic variances are only available for the factorial models".into(),
        )),
    }
}

/// Components of the matched-design limit (also the replicate-design limit).
pub fn oracle_matched(dgp: &Dgp) -> Result<OracleVariance> {
    require_factorial(dgp)?;
    let a = dgp.num_arms();
    let v1: Vec<f64> = (1..=a)
        .map(|arm| expect_normal(|x| dgp.conditional_scale_scalar(arm, x).powi(2)))
        .collect();
    let means: Vec<f64> = (1..=a)
        .map(|arm| expect_normal(|x| dgp.conditional_mean_scalar(arm, x)))
        .collect();
    let mut v2 = Mat::zeros(a, a);
    for d0 in 0..a {
        for d1 in 0..a {
            let cov = expect_normal(|x| {
                dgp.conditional_mean_scalar(d0 + 1, x) * dgp.conditional_mean_scalar(d1 + 1, x)
            }) - means[d0] * means[d1];
            v2.set(d0, d1, cov / a as f64);
        }
    }
    Ok(OracleVariance { v1, v2 })
}

/// Scalar contrast variance under the matched design.
pub fn oracle_matched_contrast(dgp: &Dgp, nu: &Contrast) -> Result<f64> {
    Ok(oracle_matched(dgp)?.contrast(nu)?.get(0, 0))
}

/// Limit of the block-cluster estimator for arm `d` against arm 1: both
/// conditional variances plus the full squared spread between the two
/// centered conditional means.
pub fn oracle_bcve_limit(dgp: &Dgp, d: usize) -> Result<f64> {
    require_factorial(dgp)?;
    let mean_d = expect_normal(|x| dgp.conditional_mean_scalar(d, x));
    let mean_1 = expect_normal(|x| dgp.conditional_mean_scalar(1, x));
    let spread = expect_normal(|x| {
        let g = (dgp.conditional_mean_scalar(d, x) - mean_d)
            - (dgp.conditional_mean_scalar(1, x) - mean_1);
        g * g
    });
    let v1_d = expect_normal(|x| dgp.conditional_scale_scalar(d, x).powi(2));
    let v1_1 = expect_normal(|x| dgp.conditional_scale_scalar(1, x).powi(2));
    Ok(v1_d + v1_1 + spread)
}

/// Asymptotic variance matrix under stratified randomization with strata cut
/// on the covariate at the given interior points (empty = complete
/// randomization).
pub fn oracle_stratified(dgp: &Dgp, cuts: &[f64]) -> Result<Mat> {
    require_factorial(dgp)?;
    let a = dgp.num_arms();
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend_from_slice(cuts);
    bounds.push(f64::INFINITY);
    let s_count = bounds.len() - 1;

    let mut share = vec![0.0; s_count];
    let mut cell_mean = vec![vec![0.0; a]; s_count];
    let mut cell_m2 = vec![vec![0.0; a]; s_count];
    let mut cell_scale2 = vec![vec![0.0; a]; s_count];
    for s in 0..s_count {
        let (lo, hi) = (bounds[s], bounds[s + 1]);
        share[s] = integrate_phi(|_| 1.0, lo, hi);
        for arm in 1..=a {
            let m = integrate_phi(|x| dgp.conditional_mean_scalar(arm, x), lo, hi) / share[s];
            let m2 =
                integrate_phi(|x| dgp.conditional_mean_scalar(arm, x).powi(2), lo, hi) / share[s];
            let s2 = integrate_phi(|x| dgp.conditional_scale_scalar(arm, x).powi(2), lo, hi)
                / share[s];
            cell_mean[s][arm - 1] = m;
            cell_m2[s][arm - 1] = m2;
            cell_scale2[s][arm - 1] = s2;
        }
    }
    let grand: Vec<f64> = (0..a)
        .map(|arm0| (0..s_count).map(|s| share[s] * cell_mean[s][arm0]).sum())
        .collect();
    let mut v = Mat::zeros(a, a);
    for arm0 in 0..a {
        // within-stratum variance: noise plus mean curvature inside strata
        let v1: f64 = (0..s_count)
            .map(|s| {
                share[s]
                    * (cell_scale2[s][arm0] + cell_m2[s][arm0]
                        - cell_mean[s][arm0] * cell_mean[s][arm0])
            })
            .sum();
        v.set(arm0, arm0, v1);
    }
    for d0 in 0..a {
        for d1 in 0..a {
            let cov: f64 = (0..s_count)
                .map(|s| {
                    share[s]
                        * (cell_mean[s][d0] - grand[d0])
                        * (cell_mean[s][d1] - grand[d1])
                })
                .sum();
            v.set(d0, d1, v.get(d0, d1) + cov / a as f64);
        }
    }
    Ok(v)
}

/// Asymptotic variance of the factor-k generating contrast under the
/// factor-specific matched-pairs design: the matched-design limit plus the
/// within-side spreads of the conditional means.
pub fn oracle_factor_specific_mp(dgp: &Dgp, k: usize) -> Result<f64> {
    require_factorial(dgp)?;
    let fs = dgp.factor_space();
    let nu = main_effect_contrast(k, &fs, false)?;
    let base = oracle_matched_contrast(dgp, &nu)?;
    let a = dgp.num_arms();
    let half = (a / 2) as f64;
    let mut extra = 0.0;
    for side in [1i8, -1i8] {
        let arms: Vec<usize> = (1..=a)
            .filter(|&arm| fs.level(arm, k).expect("arm checked") == side)
            .collect();
        for &arm in &arms {
            let dev2 = expect_normal(|x| {
                let avg: f64 = arms
                    .iter()
                    .map(|&d| dgp.conditional_mean_scalar(d, x))
                    .sum::<f64>()
                    / half;
                let dev = dgp.conditional_mean_scalar(arm, x) - avg;
                dev * dev
            });
            extra += dev2;
        }
    }
    Ok(base + extra)
}
