//! Point estimation: per-arm outcome means, linear contrasts of them, and the
//! factorial contrast constructors.

use crate::error::{Error, Result};
use crate::factorial::FactorSpace;
use crate::linalg::Mat;
use crate::sample::Sample;

/// Per-arm means of observed outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaHat {
    values: Vec<f64>,
    counts: Vec<usize>,
}

impl GammaHat {
    /// Assemble from precomputed per-arm means and counts.
    pub fn from_parts(values: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if values.len() != counts.len() || values.is_empty() {
            return Err(Error::Dimension(
                "per-arm means and counts must align".into(),
            ));
        }
        if let Some(arm0) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyArm { arm: arm0 + 1 });
        }
        Ok(GammaHat { values, counts })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_arms(&self) -> usize {
        self.values.len()
    }

    /// Units per arm, as a scaling basis: total units / number of arms.
    pub fn n_basis(&self) -> f64 {
        self.counts.iter().sum::<usize>() as f64 / self.values.len() as f64
    }
}

/// Mean observed outcome per arm; every arm must appear at least once.
pub fn gamma_hat(sample: &Sample) -> Result<GammaHat> {
    let a = sample.num_arms();
    let mut sums = vec![0.0; a];
    let mut counts = vec![0usize; a];
    for i in 0..sample.len() {
        let arm = sample.arm_of(i)?;
        let y = sample.outcome_of(i)?;
        sums[arm - 1] += y;
        counts[arm - 1] += 1;
    }
    for (arm0, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(Error::EmptyArm { arm: arm0 + 1 });
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    Ok(GammaHat { values, counts })
}

/// A real m x num_arms contrast matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Contrast {
    rows: Vec<Vec<f64>>,
    num_arms: usize,
    pub label: String,
}

impl Contrast {
    pub fn from_rows(rows: Vec<Vec<f64>>, num_arms: usize, label: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidContrast("no rows".into()));
        }
        if rows.iter().any(|r| r.len() != num_arms) {
            return Err(Error::InvalidContrast(format!(
                "rows must have {num_arms} entries"
            )));
        }
        Ok(Contrast {
            rows,
            num_arms,
            label: label.into(),
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn as_mat(&self) -> Mat {
        Mat::from_rows(&self.rows).expect("validated on construction")
    }

    /// nu * v for a vector v of per-arm values.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.num_arms {
            return Err(Error::Dimension(format!(
                "contrast over {} arms applied to vector of length {}",
                self.num_arms,
                v.len()
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// nu * V * nu' for a num_arms x num_arms matrix.
    pub fn project(&self, v: &Mat) -> Result<Mat> {
        let nu = self.as_mat();
        nu.matmul(v)?.matmul(&nu.transpose())
    }
}

/// Contrast estimate: nu * gamma_hat.
pub fn delta_hat(g: &GammaHat, nu: &Contrast) -> Result<Vec<f64>> {
    nu.apply(g.values())
}

/// Generating vector of factor `k`: entry d is the level of factor k under
/// arm d. With `rescale`, multiplied by 2^-(K-1) to turn the contrast into an
/// average difference.
pub fn main_effect_contrast(k: usize, fs: &FactorSpace, rescale: bool) -> Result<Contrast> {
    let scale = if rescale {
        0.5f64.powi(fs.num_factors() as i32 - 1)
    } else {
        1.0
    };
    let row = (1..=fs.arm_count())
        .map(|arm| fs.level(arm, k).map(|l| l as f64 * scale))
        .collect::<Result<Vec<f64>>>()?;
    Contrast::from_rows(vec![row], fs.arm_count(), format!("main:{k}"))
}

/// Interaction contrast: elementwise product of the member main-effect rows.
pub fn interaction_contrast(factors: &[usize], fs: &FactorSpace, rescale: bool) -> Result<Contrast> {
    if factors.is_empty() {
        return Err(Error::InvalidContrast(
            "interaction needs at least one factor".into(),
        ));
    }
    let mut row = vec![1.0; fs.arm_count()];
    for &k in factors {
        let main = main_effect_contrast(k, fs, false)?;
        for (r, m) in row.iter_mut().zip(&main.rows()[0]) {
            *r *= m;
        }
    }
    if rescale {
        let scale = 0.5f64.powi(fs.num_factors() as i32 - 1);
        for r in &mut row {
            *r *= scale;
        }
    }
    let label = format!(
        "inter:{}",
        factors
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Contrast::from_rows(vec![row], fs.arm_count(), label)
}

/// Effect of factor `k` with the factors in `fixed` pinned to given levels:
/// +1 weight on matching arms with factor k at +1, -1 on those with factor k
/// at -1, scaled by the number of matching arm pairs; zero elsewhere.
pub fn conditional_effect_contrast(
    k: usize,
    fixed: &[(usize, i8)],
    fs: &FactorSpace,
) -> Result<Contrast> {
    for &(f, l) in fixed {
        if f == k {
            return Err(Error::InvalidContrast(format!(
                "factor {k} cannot be both varied and fixed"
            )));
        }
        if l != 1 && l != -1 {
            return Err(Error::InvalidContrast(format!(
                "fixed level must be -1 or +1, got {l}"
            )));
        }
        if fixed.iter().any(|&(g, m)| g == f && m != l) {
            return Err(Error::InvalidContrast(format!(
                "factor {f} fixed at two different levels"
            )));
        }
    }
    let a = fs.arm_count();
    let mut row = vec![0.0; a];
    let mut matched_plus = 0usize;
    for arm in 1..=a {
        let ok = fixed
            .iter()
            .all(|&(f, l)| fs.level(arm, f).map(|x| x == l).unwrap_or(false));
        if !ok {
            continue;
        }
        if fs.level(arm, k)? == 1 {
            matched_plus += 1;
            row[arm - 1] = 1.0;
        } else {
            row[arm - 1] = -1.0;
        }
    }
    if matched_plus == 0 {
        return Err(Error::InvalidContrast(
            "fixed levels are mutually inconsistent".into(),
        ));
    }
    let scale = 1.0 / matched_plus as f64;
    for r in &mut row {
        *r *= scale;
    }
    let label = format!(
        "cond:{k}|{}",
        fixed
            .iter()
            .map(|(f, l)| format!("{f}={}", if *l > 0 { "+1" } else { "-1" }))
            .collect::<Vec<_>>()
            .join(",")
    );
    Contrast::from_rows(vec![row], a, label)
}

/// +1 at arm `d`, -1 at arm `d0`, zero elsewhere.
pub fn pairwise_contrast(d: usize, d0: usize, num_arms: usize) -> Result<Contrast> {
    if d == d0 {
        return Err(Error::InvalidContrast(
            "pairwise contrast needs two distinct arms".into(),
        ));
    }
    for &arm in &[d, d0] {
        if arm < 1 || arm > num_arms {
            return Err(Error::ArmOutOfRange { arm, num_arms });
        }
    }
    let mut row = vec![0.0; num_arms];
    row[d - 1] = 1.0;
    row[d0 - 1] = -1.0;
    Contrast::from_rows(vec![row], num_arms, format!("pair:{d},{d0}"))
}

/// Parse a contrast spec: `main:k`, `inter:1,2`, `cond:k|2=+1,3=-1`,
/// `pair:d,d0`, or explicit rows `rows:-1,1,0;-1,0,1`. Factorial forms need a
/// factor space; `pair` and `rows` work for any arm count.
pub fn parse_contrast_spec(
    spec: &str,
    fs: Option<&FactorSpace>,
    num_arms: usize,
    rescale: bool,
) -> Result<Contrast> {
    let bad = |msg: &str| Error::InvalidContrast(format!("{spec:?}: {msg}"));
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected `kind:args`"))?;
    let need_fs = || fs.ok_or_else(|| bad("factorial contrast needs a factor space (set K)"));
    match kind {
        "main" => {
            let k: usize = rest.trim().parse().map_err(|_| bad("bad factor index"))?;
            main_effect_contrast(k, need_fs()?, rescale)
        }
        "inter" => {
            let factors = rest
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| bad("bad factor index")))
                .collect::<Result<Vec<_>>>()?;
            interaction_contrast(&factors, need_fs()?, rescale)
        }
        "cond" => {
            let (k_str, fixed_str) = rest
                .split_once('|')
                .ok_or_else(|| bad("expected `cond:k|f=+1,...`"))?;
            let k: usize = k_str.trim().parse().map_err(|_| bad("bad factor index"))?;
            let mut fixed = Vec::new();
            for part in fixed_str.split(',').filter(|s| !s.trim().is_empty()) {
                let (f, l) = part
                    .split_once('=')
                    .ok_or_else(|| bad("expected `f=+1` or `f=-1`"))?;
                let f: usize = f.trim().parse().map_err(|_| bad("bad factor index"))?;
                let l = match l.trim() {
                    "+1" | "1" => 1i8,
                    "-1" => -1i8,
                    _ => return Err(bad("level must be +1 or -1")),
                };
                fixed.push((f, l));
            }
            conditional_effect_contrast(k, &fixed, need_fs()?)
        }
        "pair" => {
            let (d, d0) = rest
                .split_once(',')
                .ok_or_else(|| bad("expected `pair:d,d0`"))?;
            let d: usize = d.trim().parse().map_err(|_| bad("bad arm index"))?;
            let d0: usize = d0.trim().parse().map_err(|_| bad("bad arm index"))?;
            pairwise_contrast(d, d0, num_arms)
        }
        "rows" => {
            let rows = rest
                .split(';')
                .map(|row| {
                    row.split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|_| bad("bad row entry")))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Contrast::from_rows(rows, num_arms, spec)
        }
        other => Err(bad(&format!(
            "unknown kind {other:?} (expected main, inter, cond, or pair)"
        ))),
    }
}
