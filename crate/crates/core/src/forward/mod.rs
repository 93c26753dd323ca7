//! Deterministic solvers for expected degree distributions.

mod distribution;
mod generator;
mod quasi;
mod recursion;
mod semigroup;
mod stationary;

pub use distribution::DistributionVector;
pub use generator::TruncatedGenerator;
pub use quasi::{quasi_stationarity_check, QuasiCheck};
pub use recursion::{discrete_recursion, recover_unweighted, weighted_discrete_recursion, WeightedRecursion};
pub use semigroup::{semigroup, Uniformizer, DEFAULT_POISSON_TOL};
pub use stationary::{conditional_limit, stationary_weighted, ConditionalLimit};

use thiserror::Error;

use crate::model::ModelError;

/// Default truncation for quasi-stationarity checks.
pub const DEFAULT_K_QUASI: usize = 400;
/// Default truncation for conditional limits.
pub const DEFAULT_K_LIMIT: usize = 600;

/// Default truncation for discrete recursions up to size m.
pub fn default_k_discrete(m: usize) -> usize {
    (2 * m).max(64)
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("census is empty")]
    EmptyCensus,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("negative mass {value} at k = {k} (step {step}); generator bug")]
    NegativeMass { step: usize, k: usize, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the weighted process is not geometrically ergodic (margin {0})")]
    NotErgodic(f64),
    #[error("truncation deficit {deficit:e} exceeds bound {bound:e}")]
    DeficitExceeded { deficit: f64, bound: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
