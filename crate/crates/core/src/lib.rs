//! Design and analysis of matched-tuples and fully blocked factorial
//! randomized experiments: blocking units into homogeneous tuples, assigning
//! treatments within blocks, estimating linear contrasts of arm means, and
//! testing them with variance estimators adapted to the blocked structure.
//!
//! Everything randomized flows from a single 64-bit seed through addressed
//! child streams; the same inputs and seed reproduce every artifact.

pub mod assign;
pub mod blocking;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod factorial;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sample;
pub mod simlab;
pub mod variance;

pub use error::{Error, Result};
pub use factorial::FactorSpace;
pub use sample::{reveal, BlockPartition, PoCollection, PotentialOutcomes, Sample, Unit};
