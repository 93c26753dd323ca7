//! Tagged-degree processes: continuous-time chains, per-jump discrete
//! chains, the quantile coupling between them, and W functionals.

mod coupling;
mod ctmc;
mod discrete;
mod fast;
mod path;
mod quantile;
mod rewiring;
mod wlimit;

pub use coupling::{build_coupled_pair, CoupledPair};
pub use ctmc::{occupation_weighted, simulate_ctmc, CtmcStepper, DEFAULT_EVENT_CAP};
pub use discrete::{simulate_discrete_tagged, DiscreteOptions, DiscreteVariant};
pub use fast::{sample_binomial_big, simulate_basic_fast, yule_growth, STATE_LIMIT};
pub use path::{Clock, PathSample, PathStatus, Resolution};
pub use quantile::{c_phi, default_phi, landing_step, quantile_couple, CoupledDraw};
pub use rewiring::{kernel_tv, kernel_tv_bound, kernel_tv_corrected_bound, simulate_rewiring_pair, RewiringPairOutcome};
pub use wlimit::{w_limit_samples, WRecord, DEFAULT_SURVIVAL_THRESHOLD};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

/// Continuous-time tagged processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaggedVariant {
    Base,
    Weighted,
    Deaths,
    MultiBirth,
    RewiringLimit,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("fast-forward simulation needs the basic model (binomial thinning, constant q, no variants)")]
    NotBasic,
    #[error("quantile coupling needs b/(m+a+1) <= phi < 1 (b = {b}, m = {m}, a = {a}, phi = {phi})")]
    CouplingPrecondition { m: u64, a: f64, b: f64, phi: f64 },
    #[error("one-step probability {prob} at size {m} from state {k} is outside [0, 1]")]
    NonStochastic { m: u64, k: u64, prob: f64 },
    #[error("start state {j0} is inconsistent with graph size {m0}")]
    InconsistentStart { j0: u64, m0: u64 },
    #[error("checkpoint {0} lies beyond the path horizon")]
    CheckpointBeyondHorizon(f64),
    #[error("checkpoint {0} is not a recorded time of a skeleton path")]
    CheckpointNotRecorded(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("state exceeded 2^120 at t = {t}; shorten the horizon")]
    StateOverflow { t: f64 },
}
