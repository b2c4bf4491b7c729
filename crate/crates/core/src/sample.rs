//! Unit records, block partitions, and potential outcomes.

use crate::error::{Error, Result};

/// One experimental unit. Outcome and arm stay `None` until revealed or
/// assigned; a missing value is an explicit state, never a sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub id: String,
    pub covariates: Vec<f64>,
    pub outcome: Option<f64>,
    pub arm: Option<usize>,
}

/// An immutable collection of units sharing a covariate dimension and an arm
/// count. Arms are labeled 1..=num_arms.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    units: Vec<Unit>,
    num_arms: usize,
    dim: usize,
}

impl Sample {
    pub fn new(units: Vec<Unit>, num_arms: usize) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sample needs at least 2 arms, got {num_arms}"
            )));
        }
        if units.is_empty() {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        let dim = units[0].covariates.len();
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "covariate dimension must be at least 1".into(),
            ));
        }
        for (i, u) in units.iter().enumerate() {
            if u.covariates.len() != dim {
                return Err(Error::LengthMismatch {
                    context: "covariate vector",
                    expected: dim,
                    got: u.covariates.len(),
                });
            }
            if let Some(arm) = u.arm {
                if arm < 1 || arm > num_arms {
                    return Err(Error::ArmOutOfRange { arm, num_arms });
                }
            }
            if !u.covariates.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite covariate for unit {} (row {})",
                    u.id, i
                )));
            }
        }
        Ok(Sample {
            units,
            num_arms,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit(&self, i: usize) -> &Unit {
        &self.units[i]
    }

    pub fn covariate_column(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.dim {
            return Err(Error::CovariateIndex {
                index: j,
                dim: self.dim,
            });
        }
        Ok(self.units.iter().map(|u| u.covariates[j]).collect())
    }

    pub fn covariate_rows(&self) -> Vec<Vec<f64>> {
        self.units.iter().map(|u| u.covariates.clone()).collect()
    }

    /// A copy with arms attached; outcomes are preserved.
    pub fn with_arms(&self, arms: &[usize]) -> Result<Sample> {
        if arms.len() != self.len() {
            return Err(Error::LengthMismatch {
                context: "arm assignment",
                expected: self.len(),
                got: arms.len(),
            });
        }
        let mut units = self.units.clone();
        for (u, &arm) in units.iter_mut().zip(arms) {
            if arm < 1 || arm > self.num_arms {
                return Err(Error::ArmOutOfRange {
                    arm,
                    num_arms: self.num_arms,
                });
            }
            u.arm = Some(arm);
        }
        Sample::new(units, self.num_arms)
    }

    /// A copy with a different arm-label space (used when controls are
    /// relabeled as pseudo-arms).
    pub fn relabeled(&self, arms: &[usize], num_arms: usize) -> Result<Sample> {
        if arms.len() != self.len() {
            return Err(Error::LengthMismatch {
                context: "arm relabeling",
                expected: self.len(),
                got: arms.len(),
            });
        }
        let mut units = self.units.clone();
        for (u, &arm) in units.iter_mut().zip(arms) {
            u.arm = Some(arm);
        }
        Sample::new(units, num_arms)
    }

    pub fn arm_of(&self, i: usize) -> Result<usize> {
        self.units[i].arm.ok_or_else(|| {
            Error::Structure(format!("unit {} has no assigned arm", self.units[i].id))
        })
    }

    pub fn outcome_of(&self, i: usize) -> Result<f64> {
        self.units[i].outcome.ok_or_else(|| {
            Error::Structure(format!("unit {} has no observed outcome", self.units[i].id))
        })
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }
}

/// An ordered partition of unit indices into equal-size blocks. Block order
/// is significant: adjacent blocks are paired by downstream variance terms.
/// A partition need not cover every unit (pre-stratification may drop some);
/// operations that require full coverage check it explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    tuple_size: usize,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>, n_units: usize) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let tuple_size = blocks[0].len();
        if tuple_size == 0 {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        let mut seen = vec![false; n_units];
        for b in &blocks {
            if b.len() != tuple_size {
                return Err(Error::InvalidPartition(format!(
                    "block sizes differ: {} vs {}",
                    b.len(),
                    tuple_size
                )));
            }
            for &i in b {
                if i >= n_units {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range for {n_units} units"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} appears in two blocks"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(BlockPartition { blocks, tuple_size })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn tuple_size(&self) -> usize {
        self.tuple_size
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &[usize] {
        &self.blocks[j]
    }

    pub fn covered(&self) -> usize {
        self.blocks.len() * self.tuple_size
    }

    /// True when every unit of an `n_units`-sized sample is blocked.
    pub fn is_full_cover(&self, n_units: usize) -> bool {
        self.covered() == n_units
    }

    pub fn require_full_cover(&self, n_units: usize) -> Result<()> {
        if !self.is_full_cover(n_units) {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} of {} units",
                self.covered(),
                n_units
            )));
        }
        Ok(())
    }
}

/// Restrict a sample to the units covered by `partition`, reindexing the
/// partition accordingly. Block order and within-block order are preserved.
pub fn subsample_covered(
    sample: &Sample,
    partition: &BlockPartition,
) -> Result<(Sample, BlockPartition)> {
    let mut kept: Vec<usize> = partition.blocks().iter().flatten().copied().collect();
    kept.sort_unstable();
    let mut new_index = vec![usize::MAX; sample.len()];
    for (new, &old) in kept.iter().enumerate() {
        new_index[old] = new;
    }
    let units: Vec<Unit> = kept.iter().map(|&i| sample.unit(i).clone()).collect();
    let blocks = partition
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&i| new_index[i]).collect())
        .collect();
    let sub = Sample::new(units, sample.num_arms())?;
    let part = BlockPartition::new(blocks, sub.len())?;
    Ok((sub, part))
}

/// Potential outcomes for one unit: one outcome per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutcomes {
    pub id: String,
    pub covariates: Vec<f64>,
    pub outcomes: Vec<f64>,
}

/// All units' potential outcomes. Lives only inside the simulation lab and
/// the tests; observed data never contains more than one outcome per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct PoCollection {
    pub units: Vec<PotentialOutcomes>,
    pub num_arms: usize,
}

impl PoCollection {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// Reveal observed outcomes under an assignment: each unit keeps exactly the
/// potential outcome of its assigned arm, every other one is discarded.
pub fn reveal(po: &PoCollection, arms: &[usize]) -> Result<Sample> {
    if arms.len() != po.units.len() {
        return Err(Error::LengthMismatch {
            context: "assignment",
            expected: po.units.len(),
            got: arms.len(),
        });
    }
    let mut units = Vec::with_capacity(po.units.len());
    for (u, &arm) in po.units.iter().zip(arms) {
        if arm < 1 || arm > po.num_arms {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: po.num_arms,
            });
        }
        if u.outcomes.len() != po.num_arms {
            return Err(Error::LengthMismatch {
                context: "potential outcomes",
                expected: po.num_arms,
                got: u.outcomes.len(),
            });
        }
        units.push(Unit {
            id: u.id.clone(),
            covariates: u.covariates.clone(),
            outcome: Some(u.outcomes[arm - 1]),
            arm: Some(arm),
        });
    }
    Sample::new(units, po.num_arms)
}
