//! Monte Carlo study harness: MSE comparisons across designs, size and power
//! of the design-appropriate tests, and power curves over a grid of effect
//! sizes. Replications share potential-outcome draws across designs (common
//! random numbers) and reduce in replication order, so reports are bit-exact
//! reproducible regardless of worker count.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assign::{
    assign_bernoulli_factors, assign_factor_specific_mp, assign_matched_tuples,
    assign_rerandomized, assign_replicate_tuples, assign_stratified, RerandomizeOptions,
};
use crate::blocking::{block_by_ordering, block_recursive_pairing, MatchMethod, Standardize};
use crate::dist::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::estimate::{delta_hat, gamma_hat, parse_contrast_spec, Contrast};
use crate::inference::{confidence_interval, wald_test, TestResult};
use crate::linalg::Mat;
use crate::rng::{domain, SeedStream};
use crate::sample::{reveal, BlockPartition, PoCollection, Sample, Unit};
use crate::simlab::dgp::{Dgp, ModelId};
use crate::variance::{v_hat_adjusted, v_hat_strat_plugin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyDesign {
    BB,
    C,
    MpB,
    Mt,
    Mt2,
    Large2,
    Large4,
    Re,
}

impl StudyDesign {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "B-B" | "BB" => Ok(StudyDesign::BB),
            "C" => Ok(StudyDesign::C),
            "MP-B" | "MPB" => Ok(StudyDesign::MpB),
            "MT" => Ok(StudyDesign::Mt),
            "MT2" => Ok(StudyDesign::Mt2),
            "LARGE-2" | "LARGE2" => Ok(StudyDesign::Large2),
            "LARGE-4" | "LARGE4" => Ok(StudyDesign::Large4),
            "RE" => Ok(StudyDesign::Re),
            other => Err(Error::InvalidArgument(format!(
                "unknown design {other:?}; valid: B-B, C, MP-B, MT, MT2, Large-2, Large-4, RE"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StudyDesign::BB => "B-B",
            StudyDesign::C => "C",
            StudyDesign::MpB => "MP-B",
            StudyDesign::Mt => "MT",
            StudyDesign::Mt2 => "MT2",
            StudyDesign::Large2 => "Large-2",
            StudyDesign::Large4 => "Large-4",
            StudyDesign::Re => "RE",
        }
    }

    fn supports_inference(&self) -> bool {
        !matches!(self, StudyDesign::MpB | StudyDesign::Re)
    }
}

/// Study configuration as consumed from JSON. Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub schema: u32,
    /// "mse", "size-power", or "power-curve".
    pub study: String,
    pub model: String,
    pub tau_null: f64,
    pub tau_alt: f64,
    pub designs: Vec<String>,
    pub parameters: Vec<String>,
    /// Total number of units per replication.
    pub n: usize,
    /// Replications.
    #[serde(alias = "R")]
    pub r: usize,
    pub seed: u64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub tau_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub max_redraws: Option<usize>,
    #[serde(default)]
    pub rescale: Option<bool>,
}

pub const SCHEMA_VERSION: u32 = 1;

/// Cap the global worker pool. Thread count only changes wall time; every
/// report reduces in replication order and is bit-identical at any setting.
pub fn set_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool already configured: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyCell {
    pub design: String,
    pub parameter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_mc_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_ratio_vs_mt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_null: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_alt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_ci_length: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub model: String,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub alpha: f64,
    pub tau_null: f64,
    pub tau_alt: f64,
    pub designs: Vec<String>,
    pub parameters: Vec<String>,
    pub true_delta_null: Vec<f64>,
    pub true_delta_alt: Vec<f64>,
    pub cells: Vec<StudyCell>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerCurvePoint {
    pub design: String,
    pub parameter: String,
    pub tau: f64,
    pub reject_rate: f64,
}

struct Resolved {
    model: ModelId,
    designs: Vec<StudyDesign>,
    params: Vec<Contrast>,
    n: usize,
    r: usize,
    seed: u64,
    alpha: f64,
    max_redraws: usize,
}

fn resolve(cfg: &StudyConfig) -> Result<Resolved> {
    if cfg.schema != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported schema {} (expected {SCHEMA_VERSION})",
            cfg.schema
        )));
    }
    if cfg.r == 0 {
        return Err(Error::InvalidArgument("need at least one replication".into()));
    }
    let model = ModelId::parse(&cfg.model)?;
    let probe = Dgp::factorial(model, 0.0);
    let fs = probe.factor_space();
    let rescale = cfg.rescale.unwrap_or(false);
    let params = cfg
        .parameters
        .iter()
        .map(|p| parse_contrast_spec(p, Some(&fs), probe.num_arms(), rescale))
        .collect::<Result<Vec<_>>>()?;
    let designs = cfg
        .designs
        .iter()
        .map(|d| StudyDesign::parse(d))
        .collect::<Result<Vec<_>>>()?;
    let a = probe.num_arms();
    for d in &designs {
        let divisor = match d {
            StudyDesign::Mt | StudyDesign::Re | StudyDesign::C => a,
            StudyDesign::Mt2 => 2 * a,
            StudyDesign::MpB => 2,
            _ => 1,
        };
        if !cfg.n.is_multiple_of(divisor) {
            return Err(Error::InvalidArgument(format!(
                "design {} needs a unit count divisible by {divisor}, got {}",
                d.as_str(),
                cfg.n
            )));
        }
    }
    let alpha = cfg.alpha.unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(Resolved {
        model,
        designs,
        params,
        n: cfg.n,
        r: cfg.r,
        seed: cfg.seed,
        alpha,
        max_redraws: cfg.max_redraws.unwrap_or(100_000),
    })
}

fn covariate_sample(po: &PoCollection) -> Result<Sample> {
    let units = po
        .units
        .iter()
        .map(|u| Unit {
            id: u.id.clone(),
            covariates: u.covariates.clone(),
            outcome: None,
            arm: None,
        })
        .collect();
    Sample::new(units, po.num_arms)
}

fn rank_strata(xs: &[f64], groups: usize) -> Vec<usize> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut strata = vec![0usize; n];
    for (rank, &i) in order.iter().enumerate() {
        strata[i] = rank * groups / n;
    }
    strata
}

/// Realized data for one (replication, design) pair.
struct Realization {
    sample: Sample,
    partition: Option<BlockPartition>,
    strata: Option<Vec<usize>>,
    design: StudyDesign,
}

fn realize(
    design: StudyDesign,
    dgp: &Dgp,
    po: &PoCollection,
    assign_seed: u64,
    max_redraws: usize,
) -> Result<Realization> {
    let base = covariate_sample(po)?;
    let a = dgp.num_arms();
    let k = dgp.num_factors();
    let n = po.len();
    let scalar = dgp.dim() == 1;
    let (partition, strata, arms) = match design {
        StudyDesign::Mt => {
            let p = if scalar {
                block_by_ordering(&base, a, 0)?
            } else {
                block_recursive_pairing(&base, k, Standardize::Diagonal, MatchMethod::Greedy)?
            };
            let plan = assign_matched_tuples(&p, a, n, assign_seed)?;
            (Some(p), None, plan.arms)
        }
        StudyDesign::Mt2 => {
            let p = if scalar {
                block_by_ordering(&base, 2 * a, 0)?
            } else {
                block_recursive_pairing(&base, k + 1, Standardize::Diagonal, MatchMethod::Greedy)?
            };
            let plan = assign_replicate_tuples(&p, a, n, assign_seed)?;
            (Some(p), None, plan.arms)
        }
        StudyDesign::C => {
            let strata = vec![0usize; n];
            let plan = assign_stratified(&strata, a, assign_seed)?;
            (None, Some(strata), plan.arms)
        }
        StudyDesign::Large2 | StudyDesign::Large4 => {
            let groups = if design == StudyDesign::Large2 { 2 } else { 4 };
            let xs = base.covariate_column(0)?;
            let strata = rank_strata(&xs, groups);
            let plan = assign_stratified(&strata, a, assign_seed)?;
            (None, Some(strata), plan.arms)
        }
        StudyDesign::BB => {
            let plan = assign_bernoulli_factors(n, k, assign_seed)?;
            (None, None, plan.arms)
        }
        StudyDesign::MpB => {
            let p = if scalar {
                block_by_ordering(&base, 2, 0)?
            } else {
                block_recursive_pairing(&base, 1, Standardize::Diagonal, MatchMethod::Greedy)?
            };
            let plan = assign_factor_specific_mp(&p, 1, k, n, assign_seed)?;
            (Some(p), None, plan.arms)
        }
        StudyDesign::Re => {
            let rows = base.covariate_rows();
            let plan = assign_rerandomized(
                &rows,
                k,
                assign_seed,
                RerandomizeOptions { max_redraws },
            )?;
            (None, None, plan.arms)
        }
    };
    Ok(Realization {
        sample: reveal(po, &arms)?,
        partition,
        strata,
        design,
    })
}

fn estimates(real: &Realization, params: &[Contrast]) -> Result<Vec<f64>> {
    let g = gamma_hat(&real.sample)?;
    params
        .iter()
        .map(|nu| delta_hat(&g, nu).map(|v| v[0]))
        .collect()
}

/// Welch two-sample test between the positive- and negative-weight arms of a
/// single contrast row. The design-appropriate test for unblocked Bernoulli
/// assignment.
fn welch_test(sample: &Sample, row: &[f64], alpha: f64) -> Result<(TestResult, f64)> {
    let (mut sp, mut sm) = (0.0f64, 0.0f64);
    let (mut qp, mut qm) = (0.0f64, 0.0f64);
    let (mut np, mut nm) = (0usize, 0usize);
    for i in 0..sample.len() {
        let arm = sample.arm_of(i)?;
        let w = row[arm - 1];
        let y = sample.outcome_of(i)?;
        if w > 0.0 {
            np += 1;
            sp += y;
            qp += y * y;
        } else if w < 0.0 {
            nm += 1;
            sm += y;
            qm += y * y;
        }
    }
    if np < 2 || nm < 2 {
        return Err(Error::InvalidArgument(
            "two-sample test needs at least 2 units per side".into(),
        ));
    }
    let mp = sp / np as f64;
    let mm = sm / nm as f64;
    let vp = (qp - sp * sp / np as f64) / (np as f64 - 1.0);
    let vm = (qm - sm * sm / nm as f64) / (nm as f64 - 1.0);
    let se2 = vp / np as f64 + vm / nm as f64;
    if se2 <= 0.0 {
        return Err(Error::DegenerateVariance("two-sample variance is zero".into()));
    }
    let statistic = (mp - mm) / se2.sqrt();
    let critical = normal_quantile(1.0 - alpha / 2.0)?;
    let p_value = 2.0 * (1.0 - normal_cdf(statistic.abs()));
    let ci_len = 2.0 * critical * se2.sqrt();
    Ok((
        TestResult {
            statistic,
            df: None,
            p_value,
            reject: statistic.abs() > critical,
            alpha,
            method: "welch-normal".into(),
            critical_value: critical,
            warnings: Vec::new(),
        },
        ci_len,
    ))
}

/// Per-parameter tests for one realization: rejection flags and confidence
/// interval lengths.
fn tests_for(
    real: &Realization,
    params: &[Contrast],
    stacked: &Contrast,
    alpha: f64,
) -> Result<Vec<(bool, f64)>> {
    match real.design {
        StudyDesign::BB => params
            .iter()
            .map(|nu| welch_test(&real.sample, &nu.rows()[0], alpha).map(|(t, ci)| (t.reject, ci)))
            .collect(),
        StudyDesign::Mt | StudyDesign::Mt2 => {
            let partition = real.partition.as_ref().expect("blocked design");
            let replicate = real.design == StudyDesign::Mt2;
            let report = v_hat_adjusted(&real.sample, partition, stacked, replicate)?;
            let g = gamma_hat(&real.sample)?;
            let deltas = delta_hat(&g, stacked)?;
            let mut out = Vec::with_capacity(params.len());
            for (j, &d) in deltas.iter().enumerate() {
                let v = report.v_contrast.get(j, j);
                let t = wald_test(
                    &[d],
                    &Mat::from_rows(&[vec![v]])?,
                    &Mat::identity(1),
                    &[0.0],
                    report.n,
                    alpha,
                )?;
                let (lo, hi) = confidence_interval(d, v, report.n, alpha)?;
                out.push((t.reject, hi - lo));
            }
            Ok(out)
        }
        StudyDesign::C | StudyDesign::Large2 | StudyDesign::Large4 => {
            let strata = real.strata.as_ref().expect("stratified design");
            let report = v_hat_strat_plugin(&real.sample, strata, stacked)?;
            let g = gamma_hat(&real.sample)?;
            let deltas = delta_hat(&g, stacked)?;
            let mut out = Vec::with_capacity(params.len());
            for (j, &d) in deltas.iter().enumerate() {
                let v = report.v_contrast.get(j, j);
                let t = wald_test(
                    &[d],
                    &Mat::from_rows(&[vec![v]])?,
                    &Mat::identity(1),
                    &[0.0],
                    report.n,
                    alpha,
                )?;
                let (lo, hi) = confidence_interval(d, v, report.n, alpha)?;
                out.push((t.reject, hi - lo));
            }
            Ok(out)
        }
        StudyDesign::MpB | StudyDesign::Re => Err(Error::InvalidArgument(format!(
            "no inference procedure is wired for design {}",
            real.design.as_str()
        ))),
    }
}

fn stack(params: &[Contrast]) -> Result<Contrast> {
    let rows: Vec<Vec<f64>> = params.iter().map(|p| p.rows()[0].clone()).collect();
    Contrast::from_rows(rows, params[0].num_arms(), "stacked")
}

fn assign_seed(stream: &SeedStream, design_idx: usize, rep: usize) -> u64 {
    stream
        .derive2(domain::STUDY_ASSIGN, design_idx as u64, rep as u64)
        .random()
}

/// Squared-error accumulation across replications, reduced in replication
/// order.
pub fn run_mse_study(cfg: &StudyConfig) -> Result<StudyReport> {
    let rs = resolve(cfg)?;
    for p in &rs.params {
        if p.m() != 1 {
            return Err(Error::InvalidContrast(
                "study parameters must be single-row contrasts".into(),
            ));
        }
    }
    let dgp = Dgp::factorial(rs.model, cfg.tau_null);
    let truth: Vec<f64> = {
        let gamma = dgp.true_gamma();
        rs.params
            .iter()
            .map(|nu| nu.apply(&gamma).map(|v| v[0]))
            .collect::<Result<_>>()?
    };
    let stream = SeedStream::new(rs.seed);

    let per_rep: Vec<Vec<Vec<f64>>> = (0..rs.r)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Vec<f64>>> {
            let mut po_rng = stream.derive(domain::POTENTIAL_OUTCOMES, rep as u64);
            let po = dgp.draw(rs.n, &mut po_rng);
            let mut rep_out = Vec::with_capacity(rs.designs.len());
            for (di, &design) in rs.designs.iter().enumerate() {
                let real = realize(
                    design,
                    &dgp,
                    &po,
                    assign_seed(&stream, di, rep),
                    rs.max_redraws,
                )?;
                let est = estimates(&real, &rs.params)?;
                rep_out.push(
                    est.iter()
                        .zip(&truth)
                        .map(|(e, t)| (e - t) * (e - t))
                        .collect(),
                );
            }
            Ok(rep_out)
        })
        .collect::<Result<_>>()?;

    let d_count = rs.designs.len();
    let p_count = rs.params.len();
    let mut mse = vec![vec![0.0; p_count]; d_count];
    let mut m2 = vec![vec![0.0; p_count]; d_count];
    for rep_out in &per_rep {
        for di in 0..d_count {
            for pj in 0..p_count {
                mse[di][pj] += rep_out[di][pj];
                m2[di][pj] += rep_out[di][pj] * rep_out[di][pj];
            }
        }
    }
    let r = rs.r as f64;
    let mt_index = rs.designs.iter().position(|&d| d == StudyDesign::Mt);
    let mut cells = Vec::new();
    for (di, &design) in rs.designs.iter().enumerate() {
        for (pj, param) in rs.params.iter().enumerate() {
            let mean = mse[di][pj] / r;
            let var = (m2[di][pj] / r - mean * mean) * r / (r - 1.0);
            let ratio = mt_index.map(|mi| mean / (mse[mi][pj] / r));
            cells.push(StudyCell {
                design: design.as_str().into(),
                parameter: param.label.clone(),
                mse: Some(mean),
                mse_mc_se: Some((var / r).sqrt()),
                mse_ratio_vs_mt: ratio,
                reject_null: None,
                reject_alt: None,
                mean_ci_length: None,
            });
        }
    }
    Ok(report_skeleton(cfg, &rs, cells))
}

/// Per-design, per-parameter grid of Monte Carlo averages.
type RateGrid = Vec<Vec<f64>>;

fn rejection_pass(rs: &Resolved, tau: f64, alpha: f64) -> Result<(RateGrid, RateGrid)> {
    let dgp = Dgp::factorial(rs.model, tau);
    let stacked = stack(&rs.params)?;
    let stream = SeedStream::new(rs.seed);
    let per_rep: Vec<Vec<Vec<(bool, f64)>>> = (0..rs.r)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Vec<(bool, f64)>>> {
            let mut po_rng = stream.derive(domain::POTENTIAL_OUTCOMES, rep as u64);
            let po = dgp.draw(rs.n, &mut po_rng);
            let mut rep_out = Vec::with_capacity(rs.designs.len());
            for (di, &design) in rs.designs.iter().enumerate() {
                let real = realize(
                    design,
                    &dgp,
                    &po,
                    assign_seed(&stream, di, rep),
                    rs.max_redraws,
                )?;
                rep_out.push(tests_for(&real, &rs.params, &stacked, alpha)?);
            }
            Ok(rep_out)
        })
        .collect::<Result<_>>()?;

    let d_count = rs.designs.len();
    let p_count = rs.params.len();
    let mut rates = vec![vec![0.0; p_count]; d_count];
    let mut ci = vec![vec![0.0; p_count]; d_count];
    for rep_out in &per_rep {
        for di in 0..d_count {
            for pj in 0..p_count {
                if rep_out[di][pj].0 {
                    rates[di][pj] += 1.0;
                }
                ci[di][pj] += rep_out[di][pj].1;
            }
        }
    }
    let r = rs.r as f64;
    for di in 0..d_count {
        for pj in 0..p_count {
            rates[di][pj] /= r;
            ci[di][pj] /= r;
        }
    }
    Ok((rates, ci))
}

/// Rejection rates of the design-appropriate tests under the null and the
/// alternative effect size.
pub fn run_size_power_study(cfg: &StudyConfig) -> Result<StudyReport> {
    let rs = resolve(cfg)?;
    for d in &rs.designs {
        if !d.supports_inference() {
            return Err(Error::InvalidArgument(format!(
                "design {} has no wired inference procedure; drop it from a size-power study",
                d.as_str()
            )));
        }
    }
    let (null_rates, null_ci) = rejection_pass(&rs, cfg.tau_null, rs.alpha)?;
    let (alt_rates, _) = rejection_pass(&rs, cfg.tau_alt, rs.alpha)?;
    let mut cells = Vec::new();
    for (di, &design) in rs.designs.iter().enumerate() {
        for (pj, param) in rs.params.iter().enumerate() {
            cells.push(StudyCell {
                design: design.as_str().into(),
                parameter: param.label.clone(),
                mse: None,
                mse_mc_se: None,
                mse_ratio_vs_mt: None,
                reject_null: Some(null_rates[di][pj]),
                reject_alt: Some(alt_rates[di][pj]),
                mean_ci_length: Some(null_ci[di][pj]),
            });
        }
    }
    Ok(report_skeleton(cfg, &rs, cells))
}

/// Rejection rate per effect size over a grid; raw frequencies, no smoothing.
pub fn run_power_curve(cfg: &StudyConfig, tau_grid: &[f64]) -> Result<Vec<PowerCurvePoint>> {
    let rs = resolve(cfg)?;
    for d in &rs.designs {
        if !d.supports_inference() {
            return Err(Error::InvalidArgument(format!(
                "design {} has no wired inference procedure; drop it from a power curve",
                d.as_str()
            )));
        }
    }
    if tau_grid.is_empty() {
        return Err(Error::InvalidArgument("empty effect-size grid".into()));
    }
    let mut points = Vec::new();
    for &tau in tau_grid {
        let (rates, _) = rejection_pass(&rs, tau, rs.alpha)?;
        for (di, &design) in rs.designs.iter().enumerate() {
            for (pj, param) in rs.params.iter().enumerate() {
                points.push(PowerCurvePoint {
                    design: design.as_str().into(),
                    parameter: param.label.clone(),
                    tau,
                    reject_rate: rates[di][pj],
                });
            }
        }
    }
    Ok(points)
}

fn report_skeleton(cfg: &StudyConfig, rs: &Resolved, cells: Vec<StudyCell>) -> StudyReport {
    let truth = |tau: f64| -> Vec<f64> {
        let gamma = Dgp::factorial(rs.model, tau).true_gamma();
        rs.params
            .iter()
            .map(|nu| nu.apply(&gamma).expect("dimensions fixed")[0])
            .collect()
    };
    StudyReport {
        study: cfg.study.clone(),
        model: rs.model.as_str().into(),
        n: rs.n,
        r: rs.r,
        seed: rs.seed,
        alpha: rs.alpha,
        tau_null: cfg.tau_null,
        tau_alt: cfg.tau_alt,
        designs: rs.designs.iter().map(|d| d.as_str().into()).collect(),
        parameters: rs.params.iter().map(|p| p.label.clone()).collect(),
        true_delta_null: truth(cfg.tau_null),
        true_delta_alt: truth(cfg.tau_alt),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(study: &str, designs: &[&str], r: usize) -> StudyConfig {
        StudyConfig {
            schema: 1,
            study: study.into(),
            model: "M1".into(),
            tau_null: 0.0,
            tau_alt: 0.2,
            designs: designs.iter().map(|s| s.to_string()).collect(),
            parameters: vec!["main:1".into(), "pair:4,1".into()],
            n: 64,
            r,
            seed: 11,
            alpha: None,
            tau_grid: None,
            max_redraws: None,
            rescale: None,
        }
    }

    #[test]
    fn mse_ratio_of_mt_to_itself_is_one() {
        let cfg = small_cfg("mse", &["MT", "C"], 40);
        let report = run_mse_study(&cfg).unwrap();
        for cell in &report.cells {
            if cell.design == "MT" {
                assert_eq!(cell.mse_ratio_vs_mt, Some(1.0));
            }
        }
    }

    #[test]
    fn single_replication_mse_has_nan_se() {
        let cfg = small_cfg("mse", &["MT"], 1);
        let report = run_mse_study(&cfg).unwrap();
        assert!(report.cells[0].mse.unwrap().is_finite());
        assert!(report.cells[0].mse_mc_se.unwrap().is_nan());
    }

    #[test]
    fn reports_reproduce_bit_exactly() {
        let cfg = small_cfg("mse", &["MT", "B-B"], 25);
        let a = run_mse_study(&cfg).unwrap();
        let b = run_mse_study(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let cfg = small_cfg("size-power", &["MT", "B-B"], 15);
        let a = run_size_power_study(&cfg).unwrap();
        let b = run_size_power_study(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn reports_do_not_depend_on_worker_count() {
        let cfg = small_cfg("mse", &["MT", "C"], 20);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_mse_study(&cfg))
            .unwrap();
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_mse_study(&cfg))
            .unwrap();
        assert_eq!(
            serde_json::to_string(&single).unwrap(),
            serde_json::to_string(&several).unwrap()
        );
    }

    #[test]
    fn size_power_rejects_uninferable_designs() {
        let cfg = small_cfg("size-power", &["MP-B"], 5);
        assert!(run_size_power_study(&cfg).is_err());
        let cfg = small_cfg("size-power", &["RE"], 5);
        assert!(run_size_power_study(&cfg).is_err());
    }

    #[test]
    fn power_curve_contains_size_at_zero() {
        let mut cfg = small_cfg("power-curve", &["MT"], 30);
        cfg.r = 30;
        let points = run_power_curve(&cfg, &[0.0, 0.4]).unwrap();
        let sp = run_size_power_study(&small_cfg("size-power", &["MT"], 30)).unwrap();
        // tau = 0 point equals the size estimate from the same seed
        let p0 = points
            .iter()
            .find(|p| p.tau == 0.0 && p.parameter == "main:1")
            .unwrap();
        let size = sp
            .cells
            .iter()
            .find(|c| c.parameter == "main:1")
            .unwrap()
            .reject_null
            .unwrap();
        assert_eq!(p0.reject_rate, size);
        for p in &points {
            assert!((0.0..=1.0).contains(&p.reject_rate));
        }
    }

    #[test]
    fn power_curve_replicate_comparison_logged() {
        // the replicate design tends to dominate at scale; at desk scale the
        // comparison is informative but noisy, so it is logged, not asserted
        let mut cfg = small_cfg("power-curve", &["MT", "MT2"], 40);
        cfg.parameters = vec!["main:1".into()];
        let points = run_power_curve(&cfg, &[0.0, 0.6]).unwrap();
        for p in &points {
            println!(
                "power-curve {} tau={} reject={:.3}",
                p.design, p.tau, p.reject_rate
            );
        }
        assert_eq!(points.len(), 4);
    }

    #[test]
    fn unknown_design_and_schema_are_rejected() {
        let mut cfg = small_cfg("mse", &["XX"], 5);
        assert!(run_mse_study(&cfg).is_err());
        cfg = small_cfg("mse", &["MT"], 5);
        cfg.schema = 2;
        assert!(run_mse_study(&cfg).is_err());
        cfg = small_cfg("mse", &["MT"], 5);
        cfg.n = 63;
        assert!(run_mse_study(&cfg).is_err());
    }

    #[test]
    fn replicate_design_runs_end_to_end() {
        let cfg = small_cfg("size-power", &["MT2"], 20);
        let report = run_size_power_study(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2);
        for c in &report.cells {
            assert!(c.reject_null.unwrap() >= 0.0 && c.reject_null.unwrap() <= 1.0);
        }
    }
}
