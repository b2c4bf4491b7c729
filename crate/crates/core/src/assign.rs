//! Treatment assignment mechanisms: matched tuples, replicate tuples,
//! stratified and Bernoulli factorial randomization, factor-specific matched
//! pairs, and re-randomization under Mahalanobis balance criteria.
//!
//! Every mechanism draws from per-block (or per-unit, per-stratum) streams
//! derived from the root seed, so plans are reproducible and independent of
//! evaluation order.

use rand::Rng as _;

use crate::dist::chi2_quantile;
use crate::error::{Error, Result};
use crate::estimate::{interaction_contrast, main_effect_contrast};
use crate::factorial::FactorSpace;
use crate::linalg::{pinv_sym, Mat};
use crate::rng::{self, domain, SeedStream};
use crate::sample::BlockPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    MatchedTuples,
    ReplicateTuples,
    Stratified,
    Bernoulli,
    FactorSpecificMp,
    Rerandomized,
}

impl DesignKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignKind::MatchedTuples => "matched-tuples",
            DesignKind::ReplicateTuples => "replicate-tuples",
            DesignKind::Stratified => "stratified",
            DesignKind::Bernoulli => "bernoulli",
            DesignKind::FactorSpecificMp => "factor-specific-mp",
            DesignKind::Rerandomized => "rerandomized",
        }
    }
}

/// A realized assignment: one arm per unit plus provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentPlan {
    pub design: DesignKind,
    pub arms: Vec<usize>,
    pub num_arms: usize,
    pub seed: u64,
    /// Factor levels per unit, for factorial designs.
    pub levels: Option<Vec<Vec<i8>>>,
    /// Redraw count, for re-randomization.
    pub redraws: Option<usize>,
}

impl AssignmentPlan {
    fn new(design: DesignKind, arms: Vec<usize>, num_arms: usize, seed: u64) -> Self {
        AssignmentPlan {
            design,
            arms,
            num_arms,
            seed,
            levels: None,
            redraws: None,
        }
    }

    fn with_factor_levels(mut self, k: usize) -> Result<Self> {
        let fs = FactorSpace::new(k)?;
        self.levels = Some(
            self.arms
                .iter()
                .map(|&a| fs.levels_of_arm(a))
                .collect::<Result<_>>()?,
        );
        Ok(self)
    }
}

/// Per block, an independent uniform permutation of (1..=num_arms), assigned
/// to the block's members in index order.
pub fn assign_matched_tuples(
    partition: &BlockPartition,
    num_arms: usize,
    n_units: usize,
    seed: u64,
) -> Result<AssignmentPlan> {
    if num_arms == 0 {
        return Err(Error::InvalidArgument("need at least one arm".into()));
    }
    if partition.tuple_size() != num_arms {
        return Err(Error::Structure(format!(
            "matched tuples need tuple size = number of arms; got {} vs {}",
            partition.tuple_size(),
            num_arms
        )));
    }
    partition.require_full_cover(n_units)?;
    let stream = SeedStream::new(seed);
    let mut arms = vec![0usize; n_units];
    for (j, block) in partition.blocks().iter().enumerate() {
        let mut rng = stream.derive(domain::MATCHED_TUPLES, j as u64);
        let mut perm: Vec<usize> = (1..=num_arms).collect();
        rng::shuffle(&mut rng, &mut perm);
        let mut members = block.clone();
        members.sort_unstable();
        for (&i, &arm) in members.iter().zip(&perm) {
            arms[i] = arm;
        }
    }
    Ok(AssignmentPlan::new(
        DesignKind::MatchedTuples,
        arms,
        num_arms,
        seed,
    ))
}

/// Per block of size 2·num_arms, a uniform shuffle of the multiset holding
/// each arm exactly twice.
pub fn assign_replicate_tuples(
    partition: &BlockPartition,
    num_arms: usize,
    n_units: usize,
    seed: u64,
) -> Result<AssignmentPlan> {
    if num_arms == 0 {
        return Err(Error::InvalidArgument("need at least one arm".into()));
    }
    if partition.tuple_size() != 2 * num_arms {
        return Err(Error::Structure(format!(
            "replicate tuples need tuple size = 2 x number of arms; got {} vs {}",
            partition.tuple_size(),
            2 * num_arms
        )));
    }
    partition.require_full_cover(n_units)?;
    let stream = SeedStream::new(seed);
    let mut arms = vec![0usize; n_units];
    for (j, block) in partition.blocks().iter().enumerate() {
        let mut rng = stream.derive(domain::REPLICATE_TUPLES, j as u64);
        let mut bag: Vec<usize> = (1..=num_arms).flat_map(|a| [a, a]).collect();
        rng::shuffle(&mut rng, &mut bag);
        let mut members = block.clone();
        members.sort_unstable();
        for (&i, &arm) in members.iter().zip(&bag) {
            arms[i] = arm;
        }
    }
    Ok(AssignmentPlan::new(
        DesignKind::ReplicateTuples,
        arms,
        num_arms,
        seed,
    ))
}

/// Complete randomization within each stratum: floor(m / num_arms) units per
/// arm, the remainder spread over arms drawn uniformly without replacement.
/// A single stratum is complete randomization of the whole sample.
pub fn assign_stratified(strata: &[usize], num_arms: usize, seed: u64) -> Result<AssignmentPlan> {
    if num_arms == 0 {
        return Err(Error::InvalidArgument("need at least one arm".into()));
    }
    let stream = SeedStream::new(seed);
    let mut labels: Vec<usize> = strata.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let mut arms = vec![0usize; strata.len()];
    for (s_idx, &label) in labels.iter().enumerate() {
        let members: Vec<usize> = (0..strata.len()).filter(|&i| strata[i] == label).collect();
        let m = members.len();
        let mut rng = stream.derive(domain::STRATIFIED, s_idx as u64);
        let mut bag: Vec<usize> = Vec::with_capacity(m);
        for a in 1..=num_arms {
            bag.extend(std::iter::repeat_n(a, m / num_arms));
        }
        let mut extra: Vec<usize> = (1..=num_arms).collect();
        rng::shuffle(&mut rng, &mut extra);
        bag.extend_from_slice(&extra[..m % num_arms]);
        rng::shuffle(&mut rng, &mut bag);
        for (&i, &arm) in members.iter().zip(&bag) {
            arms[i] = arm;
        }
    }
    Ok(AssignmentPlan::new(
        DesignKind::Stratified,
        arms,
        num_arms,
        seed,
    ))
}

/// Each of K factor levels i.i.d. uniform on {-1, +1} per unit.
pub fn assign_bernoulli_factors(n_units: usize, k: usize, seed: u64) -> Result<AssignmentPlan> {
    let fs = FactorSpace::new(k)?;
    let stream = SeedStream::new(seed);
    let mut arms = Vec::with_capacity(n_units);
    for i in 0..n_units {
        let mut rng = stream.derive(domain::BERNOULLI, i as u64);
        let levels: Vec<i8> = (0..k)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        arms.push(fs.arm_of_levels(&levels)?);
    }
    let plan = AssignmentPlan::new(DesignKind::Bernoulli, arms, fs.arm_count(), seed);
    plan.with_factor_levels(k)
}

/// Matched pairs on factor `k`: within each pair the factor-k levels are
/// (-1,+1) or (+1,-1) with equal probability; every other factor is an
/// independent fair coin per unit.
pub fn assign_factor_specific_mp(
    pairs: &BlockPartition,
    k: usize,
    num_factors: usize,
    n_units: usize,
    seed: u64,
) -> Result<AssignmentPlan> {
    if pairs.tuple_size() != 2 {
        return Err(Error::Structure(format!(
            "factor-specific matched pairs need blocks of size 2, got {}",
            pairs.tuple_size()
        )));
    }
    if k < 1 || k > num_factors {
        return Err(Error::InvalidArgument(format!(
            "factor {k} out of range 1..={num_factors}"
        )));
    }
    pairs.require_full_cover(n_units)?;
    let fs = FactorSpace::new(num_factors)?;
    let stream = SeedStream::new(seed);
    let mut levels = vec![vec![0i8; num_factors]; n_units];
    for (j, block) in pairs.blocks().iter().enumerate() {
        let mut rng = stream.derive(domain::MP_FLIP, j as u64);
        let first_plus = rng.random::<bool>();
        let mut members = block.clone();
        members.sort_unstable();
        levels[members[0]][k - 1] = if first_plus { 1 } else { -1 };
        levels[members[1]][k - 1] = if first_plus { -1 } else { 1 };
    }
    for (i, row) in levels.iter_mut().enumerate() {
        let mut rng = stream.derive(domain::MP_OTHER, i as u64);
        for (f, slot) in row.iter_mut().enumerate() {
            if f + 1 != k {
                *slot = if rng.random::<bool>() { 1 } else { -1 };
            }
        }
    }
    let arms = levels
        .iter()
        .map(|l| fs.arm_of_levels(l))
        .collect::<Result<Vec<_>>>()?;
    let mut plan = AssignmentPlan::new(DesignKind::FactorSpecificMp, arms, fs.arm_count(), seed);
    plan.levels = Some(levels);
    Ok(plan)
}

/// Mahalanobis balance between the units whose arm carries +1 in
/// `contrast_row` and those whose arm carries -1 (zero-weight arms are
/// ignored): `M = (n+ n- / (n+ + n-)) (mean difference)' S^+ (mean
/// difference)` with S the full-sample covariance of the covariates. Under
/// pure randomization M is asymptotically chi-square with dim(X) degrees of
/// freedom.
pub fn mahalanobis_balance(
    covariates: &[Vec<f64>],
    arms: &[usize],
    contrast_row: &[f64],
) -> Result<f64> {
    let s_inv = pooled_covariance_pinv(covariates)?;
    mahalanobis_balance_with(covariates, arms, contrast_row, &s_inv)
}

/// Full-sample covariance pseudo-inverse, reusable across repeated balance
/// evaluations on the same covariates.
pub fn pooled_covariance_pinv(covariates: &[Vec<f64>]) -> Result<Mat> {
    let n = covariates.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least two units for a balance statistic".into(),
        ));
    }
    let p = covariates[0].len();
    let mut mean = vec![0.0; p];
    for row in covariates {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = Mat::zeros(p, p);
    for row in covariates {
        for a in 0..p {
            for b in 0..p {
                let v = cov.get(a, b) + (row[a] - mean[a]) * (row[b] - mean[b]) / n as f64;
                cov.set(a, b, v);
            }
        }
    }
    let (pinv, _) = pinv_sym(&cov, 1e-12)?;
    Ok(pinv)
}

fn mahalanobis_balance_with(
    covariates: &[Vec<f64>],
    arms: &[usize],
    contrast_row: &[f64],
    s_inv: &Mat,
) -> Result<f64> {
    if covariates.len() != arms.len() {
        return Err(Error::LengthMismatch {
            context: "balance statistic",
            expected: covariates.len(),
            got: arms.len(),
        });
    }
    let p = covariates[0].len();
    let mut sum_plus = vec![0.0; p];
    let mut sum_minus = vec![0.0; p];
    let (mut n_plus, mut n_minus) = (0usize, 0usize);
    for (row, &arm) in covariates.iter().zip(arms) {
        let w = contrast_row
            .get(arm - 1)
            .copied()
            .ok_or(Error::ArmOutOfRange {
                arm,
                num_arms: contrast_row.len(),
            })?;
        if w > 0.0 {
            n_plus += 1;
            for (s, &x) in sum_plus.iter_mut().zip(row) {
                *s += x;
            }
        } else if w < 0.0 {
            n_minus += 1;
            for (s, &x) in sum_minus.iter_mut().zip(row) {
                *s += x;
            }
        }
    }
    if n_plus < 2 || n_minus < 2 {
        return Err(Error::InvalidArgument(format!(
            "balance statistic needs at least 2 units per side, got {n_plus} and {n_minus}"
        )));
    }
    let diff: Vec<f64> = (0..p)
        .map(|j| sum_plus[j] / n_plus as f64 - sum_minus[j] / n_minus as f64)
        .collect();
    let scale = (n_plus as f64 * n_minus as f64) / (n_plus + n_minus) as f64;
    Ok(scale * s_inv.quad_form(&diff)?)
}

#[derive(Debug, Clone, Copy)]
pub struct RerandomizeOptions {
    pub max_redraws: usize,
}

impl Default for RerandomizeOptions {
    fn default() -> Self {
        RerandomizeOptions {
            max_redraws: 100_000,
        }
    }
}

/// Thresholds for the re-randomization acceptance region: each main-effect
/// balance statistic must fall below the chi-square quantile at probability
/// `0.01^(1/K)`, and each interaction statistic below the quantile at
/// `0.01^(1/L)` with L = 2^K - K - 1 interaction contrasts.
#[derive(Debug, Clone)]
pub struct BalanceCriteria {
    pub main_threshold: f64,
    pub interaction_threshold: Option<f64>,
    /// (description, generating row) per criterion.
    pub main_rows: Vec<(String, Vec<f64>)>,
    pub interaction_rows: Vec<(String, Vec<f64>)>,
}

pub fn balance_criteria(k: usize, dim: usize) -> Result<BalanceCriteria> {
    let fs = FactorSpace::new(k)?;
    let main_p = 0.01f64.powf(1.0 / k as f64);
    let main_threshold = chi2_quantile(main_p, dim)?;
    let mut main_rows = Vec::new();
    for f in 1..=k {
        let c = main_effect_contrast(f, &fs, false)?;
        main_rows.push((format!("main effect {f}"), c.rows()[0].clone()));
    }
    let mut interaction_rows = Vec::new();
    for mask in 1u32..(1 << k) {
        if mask.count_ones() >= 2 {
            let factors: Vec<usize> =
                (1..=k).filter(|f| mask >> (f - 1) & 1 == 1).collect();
            let c = interaction_contrast(&factors, &fs, false)?;
            let name = format!(
                "interaction {}",
                factors
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            interaction_rows.push((name, c.rows()[0].clone()));
        }
    }
    let interaction_threshold = if interaction_rows.is_empty() {
        None
    } else {
        let l = interaction_rows.len() as f64;
        Some(chi2_quantile(0.01f64.powf(1.0 / l), dim)?)
    };
    Ok(BalanceCriteria {
        main_threshold,
        interaction_threshold,
        main_rows,
        interaction_rows,
    })
}

/// Redraw complete factorial randomizations until every balance criterion is
/// met; fails after `max_redraws` naming the criterion that rejected most
/// often.
pub fn assign_rerandomized(
    covariates: &[Vec<f64>],
    k: usize,
    seed: u64,
    opts: RerandomizeOptions,
) -> Result<AssignmentPlan> {
    let fs = FactorSpace::new(k)?;
    let num_arms = fs.arm_count();
    let n = covariates.len();
    if !n.is_multiple_of(num_arms) {
        return Err(Error::NotDivisible {
            count: n,
            divisor: num_arms,
        });
    }
    let dim = covariates[0].len();
    let criteria = balance_criteria(k, dim)?;
    let s_inv = pooled_covariance_pinv(covariates)?;
    let strata = vec![0usize; n];
    let stream = SeedStream::new(seed);

    let mut failures: Vec<usize> =
        vec![0; criteria.main_rows.len() + criteria.interaction_rows.len()];
    for redraw in 0..opts.max_redraws {
        let draw_seed = stream.derive(domain::RERANDOMIZE, redraw as u64).random();
        let candidate = assign_stratified(&strata, num_arms, draw_seed)?;
        let mut ok = true;
        for (ci, (_, row)) in criteria
            .main_rows
            .iter()
            .chain(criteria.interaction_rows.iter())
            .enumerate()
        {
            let m = mahalanobis_balance_with(covariates, &candidate.arms, row, &s_inv)?;
            let threshold = if ci < criteria.main_rows.len() {
                criteria.main_threshold
            } else {
                criteria.interaction_threshold.expect("row implies threshold")
            };
            if m >= threshold {
                failures[ci] += 1;
                ok = false;
                break;
            }
        }
        if ok {
            let mut plan = candidate;
            plan.design = DesignKind::Rerandomized;
            plan.seed = seed;
            plan.redraws = Some(redraw);
            return plan.with_factor_levels(k);
        }
    }
    let names: Vec<&str> = criteria
        .main_rows
        .iter()
        .chain(criteria.interaction_rows.iter())
        .map(|(n, _)| n.as_str())
        .collect();
    let tightest = failures
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .map(|(i, _)| names[i].to_string())
        .unwrap_or_default();
    Err(Error::RedrawLimit {
        redraws: opts.max_redraws,
        criterion: tightest,
    })
}
