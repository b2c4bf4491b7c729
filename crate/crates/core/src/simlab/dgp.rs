//! Generative models for the simulation studies: six two-factor outcome
//! models over a scalar standard-normal covariate, plus a calibrated linear
//! family over an empirical covariate pool.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::factorial::FactorSpace;
use crate::rng::{self, Rng64};
use crate::sample::{PoCollection, PotentialOutcomes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelId {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
}

impl ModelId {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M1" | "1" => Ok(ModelId::M1),
            "M2" | "2" => Ok(ModelId::M2),
            "M3" | "3" => Ok(ModelId::M3),
            "M4" | "4" => Ok(ModelId::M4),
            "M5" | "5" => Ok(ModelId::M5),
            "M6" | "6" => Ok(ModelId::M6),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::M1 => "M1",
            ModelId::M2 => "M2",
            ModelId::M3 => "M3",
            ModelId::M4 => "M4",
            ModelId::M5 => "M5",
            ModelId::M6 => "M6",
        }
    }
}

/// A fully specified data-generating process. `Factorial` models fix two
/// factors and a scalar covariate; `CalibratedLinear` covers K factors with a
/// linear index over covariates resampled from a user-supplied pool.
#[derive(Debug, Clone)]
pub enum Dgp {
    Factorial { model: ModelId, tau: f64 },
    CalibratedLinear {
        k: usize,
        tau: f64,
        beta: Vec<f64>,
        covariate_pool: Vec<Vec<f64>>,
        /// Standard deviation of the additive noise.
        noise_sd: f64,
    },
}

impl Dgp {
    pub fn factorial(model: ModelId, tau: f64) -> Self {
        Dgp::Factorial { model, tau }
    }

    pub fn calibrated(
        k: usize,
        tau: f64,
        beta: Vec<f64>,
        covariate_pool: Vec<Vec<f64>>,
        noise_var: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one factor".into()));
        }
        if covariate_pool.is_empty() {
            return Err(Error::InvalidArgument("empty covariate pool".into()));
        }
        let dim = beta.len();
        if dim == 0 || covariate_pool.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(
                "covariate pool rows must match the coefficient length".into(),
            ));
        }
        Ok(Dgp::CalibratedLinear {
            k,
            tau,
            beta,
            covariate_pool,
            noise_sd: noise_var.sqrt(),
        })
    }

    pub fn num_factors(&self) -> usize {
        match self {
            Dgp::Factorial { .. } => 2,
            Dgp::CalibratedLinear { k, .. } => *k,
        }
    }

    pub fn num_arms(&self) -> usize {
        1 << self.num_factors()
    }

    pub fn factor_space(&self) -> FactorSpace {
        FactorSpace::new(self.num_factors()).expect("k validated")
    }

    pub fn dim(&self) -> usize {
        match self {
            Dgp::Factorial { .. } => 1,
            Dgp::CalibratedLinear { beta, .. } => beta.len(),
        }
    }

    /// Constant mean shift of `arm`.
    pub fn mu_const(&self, arm: usize) -> f64 {
        let fs = self.factor_space();
        match self {
            Dgp::Factorial { tau, .. } => {
                let d1 = fs.level(arm, 1).expect("arm checked") as f64;
                let d2 = fs.level(arm, 2).expect("arm checked") as f64;
                // (+,+) -> 2 tau, (+,-) -> tau, (-,+) -> tau/2, (-,-) -> 0
                match (d1 > 0.0, d2 > 0.0) {
                    (true, true) => 2.0 * tau,
                    (true, false) => *tau,
                    (false, true) => tau / 2.0,
                    (false, false) => 0.0,
                }
            }
            Dgp::CalibratedLinear { k, tau, .. } => {
                let d1 = fs.level(arm, 1).expect("arm checked") as f64;
                if *k == 1 {
                    tau * d1
                } else {
                    let rest: f64 = (2..=*k)
                        .map(|f| fs.level(arm, f).expect("arm checked") as f64)
                        .sum();
                    tau * (d1 + rest / (*k as f64 - 1.0))
                }
            }
        }
    }

    /// Slope multiplier used by the models with arm-specific covariate
    /// effects.
    fn gamma_coef(&self, arm: usize) -> f64 {
        let fs = self.factor_space();
        match self {
            Dgp::Factorial { .. } => {
                let d1 = fs.level(arm, 1).expect("arm checked");
                let d2 = fs.level(arm, 2).expect("arm checked");
                match (d1 > 0, d2 > 0) {
                    (true, true) => 2.0,
                    (false, true) => 1.0,
                    (true, false) => 0.5,
                    (false, false) => -1.0,
                }
            }
            Dgp::CalibratedLinear { .. } => {
                if fs.level(arm, 2.min(self.num_factors())).expect("arm checked") > 0
                    && self.num_factors() >= 2
                {
                    1.0
                } else if self.num_factors() >= 2 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Conditional mean of `arm` at a scalar covariate (factorial models).
    pub fn conditional_mean_scalar(&self, arm: usize, x: f64) -> f64 {
        match self {
            Dgp::Factorial { model, .. } => {
                let g = self.gamma_coef(arm);
                let curve = match model {
                    ModelId::M1 => x,
                    ModelId::M2 => x + (x * x - 1.0) / 3.0,
                    ModelId::M3 | ModelId::M6 => g * x + (x * x - 1.0) / 3.0,
                    ModelId::M4 => (g * x).sin(),
                    ModelId::M5 => (g * x).sin() + g * x / 10.0 + (x * x - 1.0) / 3.0,
                };
                self.mu_const(arm) + curve
            }
            Dgp::CalibratedLinear { .. } => {
                panic!("scalar conditional mean is undefined for the calibrated family")
            }
        }
    }

    /// Conditional scale of `arm` at a scalar covariate. May be negative for
    /// one model; it multiplies a symmetric noise term, so only its magnitude
    /// affects the conditional law.
    pub fn conditional_scale_scalar(&self, arm: usize, x: f64) -> f64 {
        match self {
            Dgp::Factorial { model, .. } => match model {
                ModelId::M6 => {
                    let fs = self.factor_space();
                    let d1 = fs.level(arm, 1).expect("arm checked") as f64;
                    let d2 = fs.level(arm, 2).expect("arm checked") as f64;
                    (1.0 + d1 + d2) * x * x
                }
                _ => 1.0,
            },
            Dgp::CalibratedLinear { noise_sd, .. } => *noise_sd,
        }
    }

    /// Population mean outcome per arm. The covariate terms of the factorial
    /// models all integrate to zero (odd functions or centered squares), so
    /// only the constant shifts remain; the calibrated family keeps the
    /// pool-mean index.
    pub fn true_gamma(&self) -> Vec<f64> {
        match self {
            Dgp::Factorial { .. } => {
                (1..=self.num_arms()).map(|arm| self.mu_const(arm)).collect()
            }
            Dgp::CalibratedLinear {
                beta,
                covariate_pool,
                ..
            } => {
                let mean_index = covariate_pool
                    .iter()
                    .map(|row| row.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>())
                    .sum::<f64>()
                    / covariate_pool.len() as f64;
                (1..=self.num_arms())
                    .map(|arm| self.mu_const(arm) + self.gamma_coef(arm) * mean_index)
                    .collect()
            }
        }
    }

    /// Draw all potential outcomes for `n_units` units. One covariate and one
    /// noise draw per unit are shared across arms.
    pub fn draw(&self, n_units: usize, rng: &mut Rng64) -> PoCollection {
        let a = self.num_arms();
        let mut units = Vec::with_capacity(n_units);
        match self {
            Dgp::Factorial { .. } => {
                for i in 0..n_units {
                    let x = rng::standard_normal(rng);
                    let eps = rng::standard_normal(rng);
                    let outcomes = (1..=a)
                        .map(|arm| {
                            self.conditional_mean_scalar(arm, x)
                                + self.conditional_scale_scalar(arm, x) * eps
                        })
                        .collect();
                    units.push(PotentialOutcomes {
                        id: format!("u{i:06}"),
                        covariates: vec![x],
                        outcomes,
                    });
                }
            }
            Dgp::CalibratedLinear {
                beta,
                covariate_pool,
                noise_sd,
                ..
            } => {
                for i in 0..n_units {
                    let row = &covariate_pool[rng.random_range(0..covariate_pool.len())];
                    let eps = rng::standard_normal(rng) * noise_sd;
                    let index: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
                    let outcomes = (1..=a)
                        .map(|arm| self.mu_const(arm) + self.gamma_coef(arm) * index + eps)
                        .collect();
                    units.push(PotentialOutcomes {
                        id: format!("u{i:06}"),
                        covariates: row.clone(),
                        outcomes,
                    });
                }
            }
        }
        PoCollection { units, num_arms: a }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn model1_mu_values_at_tau() {
        let dgp = Dgp::factorial(ModelId::M1, 0.2);
        // arms 1..4 = (-,-), (-,+), (+,-), (+,+)
        assert_eq!(dgp.mu_const(1), 0.0);
        assert!((dgp.mu_const(2) - 0.1).abs() < 1e-15);
        assert!((dgp.mu_const(3) - 0.2).abs() < 1e-15);
        assert!((dgp.mu_const(4) - 0.4).abs() < 1e-15);
        assert_eq!(dgp.true_gamma(), vec![0.0, 0.1, 0.2, 0.4]);
    }

    #[test]
    fn model1_tau0_differences_center_on_zero() {
        let dgp = Dgp::factorial(ModelId::M1, 0.0);
        let mut rng = SeedStream::new(41).derive(0x77, 0);
        let po = dgp.draw(100_000, &mut rng);
        let mut diff_sum = 0.0;
        let mut diff_sq = 0.0;
        for u in &po.units {
            let d = u.outcomes[3] - u.outcomes[0];
            diff_sum += d;
            diff_sq += d * d;
        }
        let n = po.units.len() as f64;
        let mean = diff_sum / n;
        let se = ((diff_sq / n - mean * mean) / n).sqrt();
        assert!(mean.abs() <= 3.0 * se + 1e-12, "mean {mean} vs 3 se {}", 3.0 * se);
        // shared covariate effect and noise: the difference is exactly zero
        assert!(se < 1e-12);
    }

    #[test]
    fn model6_scale_at_x2() {
        let dgp = Dgp::factorial(ModelId::M6, 0.0);
        // arm 1 = (-1, -1): factor (1 - 1 - 1) = -1, at x = 2 scale = -4
        assert_eq!(dgp.conditional_scale_scalar(1, 2.0), -4.0);
        // conditional variance of Y | X = 2 is 16 (symmetric unit noise)
        let mut rng = SeedStream::new(9).derive(0x78, 0);
        let reps = 200_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..reps {
            let eps = crate::rng::standard_normal(&mut rng);
            let y = dgp.conditional_mean_scalar(1, 2.0)
                + dgp.conditional_scale_scalar(1, 2.0) * eps;
            acc += y;
            acc2 += y * y;
        }
        let mean = acc / reps as f64;
        let var = acc2 / reps as f64 - mean * mean;
        assert!((var - 16.0).abs() < 0.5, "var {var}");
    }

    #[test]
    fn gamma_coefficients_by_arm() {
        let dgp = Dgp::factorial(ModelId::M3, 0.0);
        assert_eq!(dgp.gamma_coef(1), -1.0); // (-,-)
        assert_eq!(dgp.gamma_coef(2), 1.0); // (-,+)
        assert_eq!(dgp.gamma_coef(3), 0.5); // (+,-)
        assert_eq!(dgp.gamma_coef(4), 2.0); // (+,+)
    }

    #[test]
    fn true_gamma_matches_monte_carlo() {
        for model in [ModelId::M2, ModelId::M4, ModelId::M5] {
            let dgp = Dgp::factorial(model, 0.2);
            let want = dgp.true_gamma();
            let mut rng = SeedStream::new(123).derive(0x79, model as u64);
            let po = dgp.draw(1_000_000, &mut rng);
            for arm in 1..=4usize {
                let mut sum = 0.0;
                let mut sq = 0.0;
                for u in &po.units {
                    sum += u.outcomes[arm - 1];
                    sq += u.outcomes[arm - 1] * u.outcomes[arm - 1];
                }
                let n = po.units.len() as f64;
                let mean = sum / n;
                let se = ((sq / n - mean * mean) / n).sqrt();
                assert!(
                    (mean - want[arm - 1]).abs() < 3.0 * se,
                    "{model:?} arm {arm}: {mean} vs {} (3 se {})",
                    want[arm - 1],
                    3.0 * se
                );
            }
        }
    }

    #[test]
    fn calibrated_family_shapes() {
        let pool = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let dgp = Dgp::calibrated(3, 0.1, vec![2.0, -1.0], pool, 0.1).unwrap();
        assert_eq!(dgp.num_arms(), 8);
        assert_eq!(dgp.dim(), 2);
        let mut rng = SeedStream::new(3).derive(0x80, 0);
        let po = dgp.draw(64, &mut rng);
        assert_eq!(po.units.len(), 64);
        assert_eq!(po.units[0].outcomes.len(), 8);
        // K = 1 keeps a single factor and a positive slope
        let d1 = Dgp::calibrated(1, 0.5, vec![1.0], vec![vec![2.0]], 0.0).unwrap();
        assert_eq!(d1.true_gamma(), vec![-0.5 + 2.0, 0.5 + 2.0]);
    }
}
