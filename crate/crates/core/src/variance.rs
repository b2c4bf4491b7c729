//! Variance estimators for contrasts of arm means under blocked designs.
//!
//! All estimators report on the root-n scale, i.e. they estimate the
//! asymptotic variance of sqrt(n) times the estimator, with n the per-arm
//! unit count. That makes every method directly comparable and feeds the
//! Wald and t statistics without further scaling.

use crate::error::{Error, Result};
use crate::estimate::{gamma_hat, Contrast};
use crate::linalg::Mat;
use crate::sample::{BlockPartition, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMethod {
    Adjusted,
    AdjustedReplicate,
    SfeHc0,
    SfeHc1,
    Bcve,
    StratPlugin,
    TwoControlQuad,
}

impl VarianceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceMethod::Adjusted => "adjusted",
            VarianceMethod::AdjustedReplicate => "adjusted-rep",
            VarianceMethod::SfeHc0 => "sfe-hc0",
            VarianceMethod::SfeHc1 => "sfe-hc1",
            VarianceMethod::Bcve => "bcve",
            VarianceMethod::StratPlugin => "strat",
            VarianceMethod::TwoControlQuad => "quad2c",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarianceReport {
    pub method: VarianceMethod,
    /// Full per-arm matrix, when the method produces one.
    pub v_full: Option<Mat>,
    /// Contrast-projected variance, m x m (1 x 1 for scalar methods).
    pub v_contrast: Mat,
    /// Scaling basis: units per arm.
    pub n: f64,
    pub warnings: Vec<String>,
}

impl VarianceReport {
    pub fn scalar(&self) -> f64 {
        debug_assert_eq!(self.v_contrast.nrows(), 1);
        self.v_contrast.get(0, 0)
    }
}

/// Per-block, per-arm outcome sums and counts.
struct BlockSums {
    sums: Vec<Vec<f64>>,
    counts: Vec<Vec<usize>>,
    num_arms: usize,
}

impl BlockSums {
    fn collect(sample: &Sample, partition: &BlockPartition) -> Result<Self> {
        partition.require_full_cover(sample.len())?;
        let a = sample.num_arms();
        let b = partition.n_blocks();
        let mut sums = vec![vec![0.0; a]; b];
        let mut counts = vec![vec![0usize; a]; b];
        for (j, block) in partition.blocks().iter().enumerate() {
            for &i in block {
                let arm = sample.arm_of(i)?;
                let y = sample.outcome_of(i)?;
                sums[j][arm - 1] += y;
                counts[j][arm - 1] += 1;
            }
        }
        Ok(BlockSums {
            sums,
            counts,
            num_arms: a,
        })
    }

    fn require_per_block(&self, per_arm: usize) -> Result<()> {
        for (j, row) in self.counts.iter().enumerate() {
            for (arm0, &c) in row.iter().enumerate() {
                if c != per_arm {
                    return Err(Error::Structure(format!(
                        "block {} holds arm {} {} times, expected {}",
                        j + 1,
                        arm0 + 1,
                        c,
                        per_arm
                    )));
                }
            }
        }
        Ok(())
    }

    fn n_blocks(&self) -> usize {
        self.sums.len()
    }

    /// Mean outcome of `arm` within block `j`.
    fn block_mean(&self, j: usize, arm: usize) -> f64 {
        self.sums[j][arm - 1] / self.counts[j][arm - 1] as f64
    }
}

/// Cross-arm moment: mean over blocks of the product of the within-block
/// arm-d and arm-d' average outcomes. With one unit per arm per block this is
/// the plain product of the two outcomes.
pub fn rho_cross(
    sample: &Sample,
    partition: &BlockPartition,
    d: usize,
    d_prime: usize,
) -> Result<f64> {
    if d == d_prime {
        return Err(Error::InvalidArgument(
            "rho_cross needs two distinct arms; use a same-arm estimator".into(),
        ));
    }
    let bs = BlockSums::collect(sample, partition)?;
    check_arm(d, bs.num_arms)?;
    check_arm(d_prime, bs.num_arms)?;
    let b = bs.n_blocks();
    let mut acc = 0.0;
    for j in 0..b {
        if bs.counts[j][d - 1] == 0 || bs.counts[j][d_prime - 1] == 0 {
            return Err(Error::Structure(format!(
                "block {} is missing arm {} or {}",
                j + 1,
                d,
                d_prime
            )));
        }
        acc += bs.block_mean(j, d) * bs.block_mean(j, d_prime);
    }
    Ok(acc / b as f64)
}

/// Same-arm moment from adjacent blocks: mean over consecutive block pairs
/// (1,2), (3,4), ... of the product of their arm-d outcome sums. Normalized
/// by the number of pairs, which matches the 2/n convention when the block
/// count is even; a trailing odd block is left out.
pub fn rho_same_adjacent(sample: &Sample, partition: &BlockPartition, d: usize) -> Result<f64> {
    let bs = BlockSums::collect(sample, partition)?;
    check_arm(d, bs.num_arms)?;
    let b = bs.n_blocks();
    if b < 2 {
        return Err(Error::Structure(
            "adjacent-block products need at least two blocks".into(),
        ));
    }
    let pairs = b / 2;
    let mut acc = 0.0;
    for j in 0..pairs {
        acc += bs.sums[2 * j][d - 1] * bs.sums[2 * j + 1][d - 1];
    }
    Ok(acc / pairs as f64)
}

/// Same-arm moment from replicates: mean over blocks of the product of the
/// two arm-d outcomes within the block.
pub fn rho_same_replicate(sample: &Sample, partition: &BlockPartition, d: usize) -> Result<f64> {
    let bs = BlockSums::collect(sample, partition)?;
    check_arm(d, bs.num_arms)?;
    let b = bs.n_blocks();
    let mut acc = 0.0;
    for (j, block) in partition.blocks().iter().enumerate() {
        if bs.counts[j][d - 1] != 2 {
            return Err(Error::Structure(format!(
                "block {} holds arm {d} {} times, expected exactly 2",
                j + 1,
                bs.counts[j][d - 1]
            )));
        }
        let mut prod = 1.0;
        for &i in block {
            if sample.arm_of(i)? == d {
                prod *= sample.outcome_of(i)?;
            }
        }
        acc += prod;
    }
    Ok(acc / b as f64)
}

/// Per-arm mean squared deviation around the arm mean (divisor = arm count).
pub fn sigma2_hat(sample: &Sample, d: usize) -> Result<f64> {
    check_arm(d, sample.num_arms())?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..sample.len() {
        if sample.arm_of(i)? == d {
            sum += sample.outcome_of(i)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyArm { arm: d });
    }
    let mean = sum / count as f64;
    let mut acc = 0.0;
    for i in 0..sample.len() {
        if sample.arm_of(i)? == d {
            let dev = sample.outcome_of(i)? - mean;
            acc += dev * dev;
        }
    }
    Ok(acc / count as f64)
}

fn check_arm(arm: usize, num_arms: usize) -> Result<()> {
    if arm < 1 || arm > num_arms {
        return Err(Error::ArmOutOfRange { arm, num_arms });
    }
    Ok(())
}

/// The adjusted variance estimator: a diagonal part that strips the
/// conditional-mean spread out of each arm's variance, plus a dense part
/// built from within-block cross products. `replicate_mode` swaps the
/// adjacent-block same-arm moment for the within-block replicate product.
pub fn v_hat_adjusted(
    sample: &Sample,
    partition: &BlockPartition,
    nu: &Contrast,
    replicate_mode: bool,
) -> Result<VarianceReport> {
    let a = sample.num_arms();
    if nu.num_arms() != a {
        return Err(Error::Dimension(format!(
            "contrast over {} arms, sample has {}",
            nu.num_arms(),
            a
        )));
    }
    let bs = BlockSums::collect(sample, partition)?;
    bs.require_per_block(if replicate_mode { 2 } else { 1 })?;
    let g = gamma_hat(sample)?;
    let mut warnings = Vec::new();

    let rho_same: Vec<f64> = (1..=a)
        .map(|d| {
            if replicate_mode {
                rho_same_replicate(sample, partition, d)
            } else {
                rho_same_adjacent(sample, partition, d)
            }
        })
        .collect::<Result<_>>()?;

    let mut v = Mat::zeros(a, a);
    for d in 1..=a {
        let gam = g.values()[d - 1];
        let mut v1 = sigma2_hat(sample, d)? - (rho_same[d - 1] - gam * gam);
        if v1 < 0.0 {
            warnings.push(format!(
                "clipped negative diagonal term for arm {d}: {v1:.6e}"
            ));
            v1 = 0.0;
        }
        v.set(d - 1, d - 1, v1 + (rho_same[d - 1] - gam * gam) / a as f64);
        for d2 in (d + 1)..=a {
            let cross = rho_cross(sample, partition, d, d2)?
                - g.values()[d - 1] * g.values()[d2 - 1];
            let v2 = cross / a as f64;
            v.set(d - 1, d2 - 1, v2);
            v.set(d2 - 1, d - 1, v2);
        }
    }

    let mut v_contrast = nu.project(&v)?;
    clip_diagonal(&mut v_contrast, &mut warnings);
    Ok(VarianceReport {
        method: if replicate_mode {
            VarianceMethod::AdjustedReplicate
        } else {
            VarianceMethod::Adjusted
        },
        v_full: Some(v),
        v_contrast,
        n: g.n_basis(),
        warnings,
    })
}

fn clip_diagonal(m: &mut Mat, warnings: &mut Vec<String>) {
    for i in 0..m.nrows() {
        let v = m.get(i, i);
        if v < 0.0 {
            warnings.push(format!(
                "clipped negative contrast variance at row {i}: {v:.6e}"
            ));
            m.set(i, i, 0.0);
        }
    }
}

/// Degrees-of-freedom factor for the fixed-effects regression variance:
/// 1 for HC0; N / (N - (arms - 1 + blocks)) for HC1, N the total unit count.
pub fn kappa(num_arms: usize, n_blocks: usize, hc1: bool) -> f64 {
    if !hc1 {
        return 1.0;
    }
    let total = (num_arms * n_blocks) as f64;
    total / (total - (num_arms - 1 + n_blocks) as f64)
}

/// Closed-form heteroskedasticity-robust variance of the block fixed-effects
/// regression coefficient for arm `d` against arm 1, reported on the root-n
/// scale. Numerically identical to the HC sandwich from the explicit
/// fixed-effects least-squares fit.
pub fn v_hat_sfe(
    sample: &Sample,
    partition: &BlockPartition,
    d: usize,
    hc1: bool,
) -> Result<VarianceReport> {
    let a = sample.num_arms();
    check_arm(d, a)?;
    if d == 1 {
        return Err(Error::InvalidArgument(
            "arm 1 is the reference; pick d > 1".into(),
        ));
    }
    let bs = BlockSums::collect(sample, partition)?;
    bs.require_per_block(1)?;
    let g = gamma_hat(sample)?;
    let n = bs.n_blocks() as f64;
    let grand = g.values().iter().sum::<f64>() / a as f64;

    let mut acc = 0.0;
    for arm in [1usize, d] {
        let mut sq = 0.0;
        for j in 0..bs.n_blocks() {
            let block_total: f64 = bs.sums[j].iter().sum();
            let centered = bs.sums[j][arm - 1] - block_total / a as f64;
            sq += centered * centered;
        }
        let gap = g.values()[arm - 1] - grand;
        acc += sq / (n * n) - gap * gap / n;
    }
    let scaled = n * kappa(a, bs.n_blocks(), hc1) * acc;
    Ok(VarianceReport {
        method: if hc1 {
            VarianceMethod::SfeHc1
        } else {
            VarianceMethod::SfeHc0
        },
        v_full: None,
        v_contrast: Mat::from_rows(&[vec![scaled]])?,
        n: g.n_basis(),
        warnings: Vec::new(),
    })
}

/// Block-cluster variance for arm `d` against arm 1: the mean squared
/// within-block outcome gap minus the squared mean gap. Identical to the
/// block-clustered regression sandwich on the root-n scale; conservative in
/// the limit.
pub fn v_hat_bcve(sample: &Sample, partition: &BlockPartition, d: usize) -> Result<VarianceReport> {
    let a = sample.num_arms();
    check_arm(d, a)?;
    if d == 1 {
        return Err(Error::InvalidArgument(
            "arm 1 is the reference; pick d > 1".into(),
        ));
    }
    let bs = BlockSums::collect(sample, partition)?;
    bs.require_per_block(1)?;
    let g = gamma_hat(sample)?;
    let n = bs.n_blocks() as f64;
    let mut acc = 0.0;
    for j in 0..bs.n_blocks() {
        let gap = bs.sums[j][d - 1] - bs.sums[j][0];
        acc += gap * gap;
    }
    let mean_gap = g.values()[d - 1] - g.values()[0];
    let value = acc / n - mean_gap * mean_gap;
    Ok(VarianceReport {
        method: VarianceMethod::Bcve,
        v_full: None,
        v_contrast: Mat::from_rows(&[vec![value]])?,
        n: g.n_basis(),
        warnings: Vec::new(),
    })
}

/// Plug-in variance under stratified randomization: stratum-share-weighted
/// within-cell variances on the diagonal plus between-stratum covariance of
/// the cell means, scaled by the arm count.
pub fn v_hat_strat_plugin(
    sample: &Sample,
    strata: &[usize],
    nu: &Contrast,
) -> Result<VarianceReport> {
    let a = sample.num_arms();
    if nu.num_arms() != a {
        return Err(Error::Dimension(format!(
            "contrast over {} arms, sample has {}",
            nu.num_arms(),
            a
        )));
    }
    if strata.len() != sample.len() {
        return Err(Error::LengthMismatch {
            context: "strata labels",
            expected: sample.len(),
            got: strata.len(),
        });
    }
    let mut labels: Vec<usize> = strata.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let s_count = labels.len();
    let total = sample.len() as f64;

    // cell sums, counts, then means and within-cell variances
    let mut cell_sum = vec![vec![0.0; a]; s_count];
    let mut cell_count = vec![vec![0usize; a]; s_count];
    let mut stratum_count = vec![0usize; s_count];
    let stratum_of = |label: usize| labels.binary_search(&label).expect("label seen");
    for (i, &label) in strata.iter().enumerate() {
        let s = stratum_of(label);
        let arm = sample.arm_of(i)?;
        cell_sum[s][arm - 1] += sample.outcome_of(i)?;
        cell_count[s][arm - 1] += 1;
        stratum_count[s] += 1;
    }
    for (s, row) in cell_count.iter().enumerate() {
        for (arm0, &c) in row.iter().enumerate() {
            if c < 2 {
                return Err(Error::CellTooSmall {
                    stratum: labels[s],
                    arm: arm0 + 1,
                    count: c,
                });
            }
        }
    }
    let cell_mean: Vec<Vec<f64>> = (0..s_count)
        .map(|s| {
            (0..a)
                .map(|arm0| cell_sum[s][arm0] / cell_count[s][arm0] as f64)
                .collect()
        })
        .collect();
    let mut cell_var = vec![vec![0.0; a]; s_count];
    for (i, &label) in strata.iter().enumerate() {
        let s = stratum_of(label);
        let arm = sample.arm_of(i)?;
        let dev = sample.outcome_of(i)? - cell_mean[s][arm - 1];
        cell_var[s][arm - 1] += dev * dev;
    }
    for (vars, counts) in cell_var.iter_mut().zip(&cell_count) {
        for (v, &c) in vars.iter_mut().zip(counts) {
            *v /= c as f64;
        }
    }

    let share: Vec<f64> = stratum_count.iter().map(|&c| c as f64 / total).collect();
    let weighted_mean: Vec<f64> = (0..a)
        .map(|arm0| (0..s_count).map(|s| share[s] * cell_mean[s][arm0]).sum())
        .collect();

    let mut v = Mat::zeros(a, a);
    for arm0 in 0..a {
        let v1: f64 = share
            .iter()
            .zip(&cell_var)
            .map(|(sh, vars)| sh * vars[arm0])
            .sum();
        v.set(arm0, arm0, v1);
    }
    for d0 in 0..a {
        for d1 in 0..a {
            let cov: f64 = (0..s_count)
                .map(|s| {
                    share[s]
                        * (cell_mean[s][d0] - weighted_mean[d0])
                        * (cell_mean[s][d1] - weighted_mean[d1])
                })
                .sum();
            let val = v.get(d0, d1) + cov / a as f64;
            v.set(d0, d1, val);
        }
    }

    let mut warnings = Vec::new();
    let mut v_contrast = nu.project(&v)?;
    clip_diagonal(&mut v_contrast, &mut warnings);
    Ok(VarianceReport {
        method: VarianceMethod::StratPlugin,
        v_full: Some(v),
        v_contrast,
        n: total / a as f64,
        warnings,
    })
}

/// Contrast rows for the two-controls quadruplet design after relabeling the
/// controls as pseudo-arms 1 and 2: rows estimate arm 2 vs pooled controls,
/// arm 3 vs pooled controls, and arm 3 vs arm 2.
pub fn two_control_quad_contrast() -> Contrast {
    Contrast::from_rows(
        vec![
            vec![-0.5, -0.5, 1.0, 0.0],
            vec![-0.5, -0.5, 0.0, 1.0],
            vec![0.0, 0.0, -1.0, 1.0],
        ],
        4,
        "quad2c",
    )
    .expect("static rows")
}

/// Relabel a two-controls quadruplet sample (arms 1,1,2,3 per block) onto
/// four pseudo-arms: the controls become arms 1 and 2 in within-block index
/// order, the treatments become arms 3 and 4. Controls are exchangeable under
/// within-block randomization, so the order choice is immaterial for the
/// pooled contrasts.
pub fn quad_relabel(sample: &Sample, partition: &BlockPartition) -> Result<Sample> {
    if sample.num_arms() != 3 {
        return Err(Error::Structure(format!(
            "two-controls quadruplets need 3 observed arms, got {}",
            sample.num_arms()
        )));
    }
    partition.require_full_cover(sample.len())?;
    if partition.tuple_size() != 4 {
        return Err(Error::Structure(format!(
            "quadruplet blocks must have 4 units, got {}",
            partition.tuple_size()
        )));
    }
    let mut new_arms = vec![0usize; sample.len()];
    for (j, block) in partition.blocks().iter().enumerate() {
        let mut members = block.clone();
        members.sort_unstable();
        let mut controls = 0;
        let (mut saw2, mut saw3) = (false, false);
        for &i in &members {
            match sample.arm_of(i)? {
                1 => {
                    controls += 1;
                    if controls > 2 {
                        return Err(Error::Structure(format!(
                            "block {} has more than two controls",
                            j + 1
                        )));
                    }
                    new_arms[i] = controls; // pseudo-arm 1 then 2
                }
                2 => {
                    saw2 = true;
                    new_arms[i] = 3;
                }
                3 => {
                    saw3 = true;
                    new_arms[i] = 4;
                }
                other => {
                    return Err(Error::ArmOutOfRange {
                        arm: other,
                        num_arms: 3,
                    })
                }
            }
        }
        if controls != 2 || !saw2 || !saw3 {
            return Err(Error::Structure(format!(
                "block {} is not a (control, control, arm 2, arm 3) quadruplet",
                j + 1
            )));
        }
    }
    sample.relabeled(&new_arms, 4)
}

/// Variance for one row of the two-controls quadruplet contrast, by
/// relabeling and delegating to the adjusted estimator.
pub fn v_hat_two_control_quad(
    sample: &Sample,
    partition: &BlockPartition,
    which: usize,
) -> Result<VarianceReport> {
    if which >= 3 {
        return Err(Error::InvalidArgument(format!(
            "quadruplet contrast row {which} out of range 0..3"
        )));
    }
    let pseudo = quad_relabel(sample, partition)?;
    let full = two_control_quad_contrast();
    let row = Contrast::from_rows(
        vec![full.rows()[which].clone()],
        4,
        format!("quad2c:{which}"),
    )?;
    let mut report = v_hat_adjusted(&pseudo, partition, &row, false)?;
    report.method = VarianceMethod::TwoControlQuad;
    Ok(report)
}
