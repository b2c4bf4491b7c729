//! Simulation lab: generative models, analytic variance oracles, and the
//! Monte Carlo study harness.

pub mod dgp;
pub mod oracle;
pub mod quad;
pub mod study;

pub use dgp::{Dgp, ModelId};
pub use oracle::{
    oracle_bcve_limit, oracle_factor_specific_mp, oracle_matched, oracle_matched_contrast,
    oracle_stratified, OracleVariance,
};
pub use study::{
    run_mse_study, run_power_curve, run_size_power_study, PowerCurvePoint, StudyConfig,
    StudyDesign, StudyReport, SCHEMA_VERSION,
};
