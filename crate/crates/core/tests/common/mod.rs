//! Shared test-only oracles: a self-contained random generator, dense linear
//! algebra, and explicit least-squares fits with robust and clustered
//! sandwiches. Everything here is independent of the library's own numeric
//! paths so it can serve as a cross-check.

#![allow(dead_code)]

use tupleworks_core::sample::{BlockPartition, Sample, Unit};

/// xorshift64* generator: deterministic test data without touching the
/// library's stream machinery.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }

    /// Box-Muller normal draw.
    pub fn normal(&mut self) -> f64 {
        let u = self.uniform().max(1e-300);
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

/// Solve A X = B by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-12, "singular system");
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / p;
            let pivot_row = a[col].clone();
            for (k, entry) in a[row].iter_mut().enumerate().skip(col) {
                *entry -= f * pivot_row[k];
            }
            let pivot_rhs = b[col].clone();
            for (k, entry) in b[row].iter_mut().enumerate() {
                *entry -= f * pivot_rhs[k];
            }
        }
    }
    (0..n)
        .map(|i| (0..m).map(|k| b[i][k] / a[i][i]).collect())
        .collect()
}

pub fn invert(a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let eye: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    solve_dense(a, eye)
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t] == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

/// A fixed-effects least-squares fit: outcome on arm dummies (arms 2..A) and
/// one dummy per block, no intercept.
pub struct FeOls {
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub design: Vec<Vec<f64>>,
    pub xtx_inv: Vec<Vec<f64>>,
    pub num_arms: usize,
}

pub fn fe_ols(ys: &[f64], arms: &[usize], block_of: &[usize], num_arms: usize) -> FeOls {
    let n_blocks = block_of.iter().max().unwrap() + 1;
    let p = num_arms - 1 + n_blocks;
    let design: Vec<Vec<f64>> = ys
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let mut row = vec![0.0; p];
            if arms[i] >= 2 {
                row[arms[i] - 2] = 1.0;
            }
            row[num_arms - 1 + block_of[i]] = 1.0;
            row
        })
        .collect();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![vec![0.0; 1]; p];
    for (row, &y) in design.iter().zip(ys) {
        for a in 0..p {
            if row[a] == 0.0 {
                continue;
            }
            for b in 0..p {
                xtx[a][b] += row[a] * row[b];
            }
            xty[a][0] += row[a] * y;
        }
    }
    let xtx_inv = invert(xtx.clone());
    let beta_mat = solve_dense(xtx, xty);
    let beta: Vec<f64> = beta_mat.iter().map(|r| r[0]).collect();
    let residuals: Vec<f64> = ys
        .iter()
        .zip(&design)
        .map(|(&y, row)| y - row.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    FeOls {
        beta,
        residuals,
        design,
        xtx_inv,
        num_arms,
    }
}

/// Heteroskedasticity-robust sandwich (X'X)^-1 X' diag(e^2) X (X'X)^-1.
pub fn hc_sandwich(fit: &FeOls) -> Vec<Vec<f64>> {
    let p = fit.xtx_inv.len();
    let mut meat = vec![vec![0.0; p]; p];
    for (row, &e) in fit.design.iter().zip(&fit.residuals) {
        let w = e * e;
        for a in 0..p {
            if row[a] == 0.0 {
                continue;
            }
            for b in 0..p {
                meat[a][b] += w * row[a] * row[b];
            }
        }
    }
    matmul(&matmul(&fit.xtx_inv, &meat), &fit.xtx_inv)
}

/// Cluster sandwich for the regression of outcome on an intercept plus arm
/// dummies, clustering by block: (X'X)^-1 (sum_j s_j s_j') (X'X)^-1.
pub fn cluster_sandwich(
    ys: &[f64],
    arms: &[usize],
    block_of: &[usize],
    num_arms: usize,
) -> Vec<Vec<f64>> {
    let p = num_arms; // intercept + (num_arms - 1) dummies
    let design: Vec<Vec<f64>> = arms
        .iter()
        .map(|&arm| {
            let mut row = vec![0.0; p];
            row[0] = 1.0;
            if arm >= 2 {
                row[arm - 1] = 1.0;
            }
            row
        })
        .collect();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![vec![0.0; 1]; p];
    for (row, &y) in design.iter().zip(ys) {
        for a in 0..p {
            if row[a] == 0.0 {
                continue;
            }
            for b in 0..p {
                xtx[a][b] += row[a] * row[b];
            }
            xty[a][0] += row[a] * y;
        }
    }
    let xtx_inv = invert(xtx.clone());
    let beta: Vec<f64> = solve_dense(xtx, xty).iter().map(|r| r[0]).collect();
    let n_blocks = block_of.iter().max().unwrap() + 1;
    let mut scores = vec![vec![0.0; p]; n_blocks];
    for i in 0..ys.len() {
        let e = ys[i] - design[i].iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>();
        for a in 0..p {
            scores[block_of[i]][a] += e * design[i][a];
        }
    }
    let mut meat = vec![vec![0.0; p]; p];
    for s in &scores {
        for a in 0..p {
            for b in 0..p {
                meat[a][b] += s[a] * s[b];
            }
        }
    }
    matmul(&matmul(&xtx_inv, &meat), &xtx_inv)
}

/// Random matched-tuples data: each block holds every arm exactly once in a
/// random order, outcomes are block effects plus arm effects plus noise.
pub fn random_matched_dataset(
    rng: &mut TestRng,
    num_arms: usize,
    n_blocks: usize,
) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let n = num_arms * n_blocks;
    let mut ys = vec![0.0; n];
    let mut arms = vec![0usize; n];
    let mut block_of = vec![0usize; n];
    for j in 0..n_blocks {
        let block_effect = rng.normal();
        let mut perm: Vec<usize> = (1..=num_arms).collect();
        for i in (1..perm.len()).rev() {
            let k = rng.range(i + 1);
            perm.swap(i, k);
        }
        for (slot, &arm) in perm.iter().enumerate() {
            let i = j * num_arms + slot;
            arms[i] = arm;
            block_of[i] = j;
            ys[i] = block_effect + 0.7 * arm as f64 + rng.normal();
        }
    }
    (ys, arms, block_of)
}

/// Wrap raw vectors into the library's sample and partition types.
pub fn to_sample(
    ys: &[f64],
    arms: &[usize],
    block_of: &[usize],
    num_arms: usize,
) -> (Sample, BlockPartition) {
    let units: Vec<Unit> = ys
        .iter()
        .zip(arms)
        .enumerate()
        .map(|(i, (&y, &a))| Unit {
            id: format!("u{i:04}"),
            covariates: vec![i as f64],
            outcome: Some(y),
            arm: Some(a),
        })
        .collect();
    let n_blocks = block_of.iter().max().unwrap() + 1;
    let blocks: Vec<Vec<usize>> = (0..n_blocks)
        .map(|j| (0..ys.len()).filter(|&i| block_of[i] == j).collect())
        .collect();
    let sample = Sample::new(units, num_arms).unwrap();
    let partition = BlockPartition::new(blocks, ys.len()).unwrap();
    (sample, partition)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
