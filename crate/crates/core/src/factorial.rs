//! Two-level factor spaces: the bijection between arm labels and factor-level
//! vectors.
//!
//! The canonical arm ordering is lexicographic in the level vector with -1
//! before +1 and factor 1 most significant, so for K = 2 arms 1..4 carry
//! levels (-1,-1), (-1,+1), (+1,-1), (+1,+1).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorSpace {
    k: usize,
}

impl FactorSpace {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "a factor space needs at least one factor".into(),
            ));
        }
        if k > 20 {
            return Err(Error::InvalidArgument(format!(
                "2^{k} arms is beyond any supported design"
            )));
        }
        Ok(FactorSpace { k })
    }

    pub fn num_factors(&self) -> usize {
        self.k
    }

    pub fn arm_count(&self) -> usize {
        1 << self.k
    }

    /// Level of `factor` (1-based) under `arm` (1-based).
    pub fn level(&self, arm: usize, factor: usize) -> Result<i8> {
        self.check_arm(arm)?;
        self.check_factor(factor)?;
        let bit = (arm - 1) >> (self.k - factor) & 1;
        Ok(if bit == 1 { 1 } else { -1 })
    }

    pub fn levels_of_arm(&self, arm: usize) -> Result<Vec<i8>> {
        self.check_arm(arm)?;
        (1..=self.k).map(|f| self.level(arm, f)).collect()
    }

    pub fn arm_of_levels(&self, levels: &[i8]) -> Result<usize> {
        if levels.len() != self.k {
            return Err(Error::LengthMismatch {
                context: "factor levels",
                expected: self.k,
                got: levels.len(),
            });
        }
        let mut arm = 0usize;
        for &l in levels {
            arm <<= 1;
            match l {
                1 => arm |= 1,
                -1 => {}
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "factor level must be -1 or +1, got {other}"
                    )))
                }
            }
        }
        Ok(arm + 1)
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < 1 || arm > self.arm_count() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.arm_count(),
            });
        }
        Ok(())
    }

    fn check_factor(&self, factor: usize) -> Result<()> {
        if factor < 1 || factor > self.k {
            return Err(Error::InvalidArgument(format!(
                "factor {factor} out of range 1..={}",
                self.k
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_factor_table() {
        let fs = FactorSpace::new(2).unwrap();
        assert_eq!(fs.arm_of_levels(&[-1, -1]).unwrap(), 1);
        assert_eq!(fs.arm_of_levels(&[-1, 1]).unwrap(), 2);
        assert_eq!(fs.arm_of_levels(&[1, -1]).unwrap(), 3);
        assert_eq!(fs.arm_of_levels(&[1, 1]).unwrap(), 4);
        assert_eq!(fs.levels_of_arm(3).unwrap(), vec![1, -1]);
    }

    #[test]
    fn single_factor_round_trip() {
        let fs = FactorSpace::new(1).unwrap();
        assert_eq!(fs.arm_of_levels(&[1]).unwrap(), 2);
        assert_eq!(fs.levels_of_arm(2).unwrap(), vec![1]);
    }

    #[test]
    fn round_trip_identity_up_to_k10() {
        for k in 1..=10 {
            let fs = FactorSpace::new(k).unwrap();
            for arm in 1..=fs.arm_count() {
                let levels = fs.levels_of_arm(arm).unwrap();
                assert_eq!(fs.arm_of_levels(&levels).unwrap(), arm);
            }
        }
    }

    #[test]
    fn rejects_bad_levels() {
        let fs = FactorSpace::new(2).unwrap();
        assert!(fs.arm_of_levels(&[1]).is_err());
        assert!(fs.arm_of_levels(&[1, 0]).is_err());
        assert!(fs.levels_of_arm(5).is_err());
        assert!(FactorSpace::new(0).is_err());
    }
}
