//! Quadrature for standard-normal expectations: Gauss-Hermite on the full
//! line (exact for polynomial integrands well past anything used here) and
//! composite Gauss-Legendre against the normal density for interval moments.

use std::sync::OnceLock;

/// Node count for the full-line rule.
pub const HERMITE_NODES: usize = 201;

// Orthonormal Hermite value p_n(z) and the derivative factor sqrt(2n) p_{n-1}(z).
fn hermite_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2
            - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

// Nodes and weights for the physicists' weight exp(-t^2). Positive roots are
// bracketed by a sign-change scan, bisected, and polished with Newton steps;
// negatives mirror them.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let x_max = (2.0 * n as f64 + 1.0).sqrt() + 0.5;
    let steps = 40 * n;
    let h = x_max / steps as f64;
    let mut found = if n % 2 == 1 { 1 } else { 0 }; // odd n has a root at 0
    let m = n.div_ceil(2);
    let mut prev_x = h / 2.0;
    let mut prev_v = hermite_eval(n, prev_x).0;
    let mut k = 1usize;
    let mut positives = Vec::with_capacity(n / 2);
    while found < m && k <= steps * 2 {
        let x = h / 2.0 + k as f64 * h;
        let v = hermite_eval(n, x).0;
        if prev_v == 0.0 {
            positives.push(prev_x);
            found += 1;
        } else if v != 0.0 && prev_v.signum() != v.signum() {
            let (mut lo, mut hi) = (prev_x, x);
            let mut f_lo = prev_v;
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                let f_mid = hermite_eval(n, mid).0;
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            let mut z = 0.5 * (lo + hi);
            for _ in 0..3 {
                let (p, pp) = hermite_eval(n, z);
                let dz = p / pp;
                if dz.is_finite() {
                    z -= dz;
                }
            }
            positives.push(z);
            found += 1;
        }
        prev_x = x;
        prev_v = v;
        k += 1;
    }
    debug_assert_eq!(found, m, "missed Hermite roots");

    // descending positive roots first, mirrored negatives at the back
    positives.sort_by(|a, b| b.total_cmp(a));
    for (i, &z) in positives.iter().enumerate() {
        let (_, pp) = hermite_eval(n, z);
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        let mid = n / 2;
        nodes[mid] = 0.0;
        let (_, pp) = hermite_eval(n, 0.0);
        weights[mid] = 2.0 / (pp * pp);
    }
    (nodes, weights)
}

fn hermite_table() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| gauss_hermite(HERMITE_NODES))
}

/// E[f(X)] for X standard normal.
pub fn expect_normal(f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = hermite_table();
    let scale = std::f64::consts::PI.sqrt();
    let mut acc = 0.0;
    for (&t, &w) in nodes.iter().zip(weights) {
        acc += w * f(std::f64::consts::SQRT_2 * t);
    }
    acc / scale
}

// 16-node Gauss-Legendre on [-1, 1].
fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 16usize;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..200 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        (nodes, weights)
    })
}

const PHI_CLIP: f64 = 12.0;

fn phi(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Integral of f(x) phi(x) over (a, b); infinite endpoints are clipped where
/// the normal density is numerically zero.
pub fn integrate_phi(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let lo = a.max(-PHI_CLIP);
    let hi = b.min(PHI_CLIP);
    if lo >= hi {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_16();
    let panels = 64usize;
    let width = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let left = lo + p as f64 * width;
        let mid = left + width / 2.0;
        let half = width / 2.0;
        for (&t, &w) in nodes.iter().zip(weights) {
            let x = mid + half * t;
            acc += w * half * f(x) * phi(x);
        }
    }
    acc
}
