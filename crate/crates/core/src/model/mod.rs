//! Model parameterizations, generator rows and regime classification.

mod classify;
mod config;
mod qrow;
mod roots;
mod spec;
pub(crate) mod thinning;

pub use classify::{classify, eta_star, Process, RegimeReport, Region, Verdict, BOUNDARY_TOL};
pub use config::{
    ModelConfig, MultiBirthConfig, PerturbationConfig, Perturbations, RewiringModeConfig, ThinningConfig,
};
pub use qrow::{q_row, QRow, RowEntry, RowVariant};
pub use roots::{p_star, q1, q2, region_boundaries, x_star};
pub use spec::{
    sweep_points, ModelSpec, MultiBirth, Rates, Rewiring, RewiringMode, Sequence, DEFAULT_J_MAX,
    SWEEP_K_MAX,
};
pub use thinning::{Envelope, ThinningFamily, ThinningKind, ThinningLaw};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{what} violates its declared envelope at k = {k}")]
    EnvelopeViolated { what: &'static str, k: usize },
    #[error("thinning law for k = {k} is not a probability row (sum = {sum})")]
    NotStochastic { k: usize, sum: f64 },
    #[error("alpha_k is not constant (alpha_{k} = {alpha_k}, alpha = {alpha})")]
    ConstraintViolated { k: usize, alpha_k: f64, alpha: f64 },
    #[error("state {k} out of range (limit {limit})")]
    StateOutOfRange { k: usize, limit: usize },
    #[error("the {0} variant is not configured on this spec")]
    MissingVariant(&'static str),
    #[error("operation needs duplication-divergence rates (q_k), not general alpha/beta")]
    NeedsRetention,
    #[error("x = u(1 - e^-x) has no positive root for u = {0}")]
    NoPositiveRoot(f64),
    #[error("process is not geometrically ergodic (margin {0})")]
    NotErgodic(f64),
    #[error("thinning mean k p_k vanishes at k = {0}")]
    DegenerateThinning(usize),
}
