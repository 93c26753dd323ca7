//! Monte Carlo experiments with pass/fail reports.
//!
//! Every experiment fans paths out over rayon and collects them in index
//! order before reducing, so results do not depend on the worker count.

mod absorption;
mod clt;
mod coupling;
mod rewiring;
mod stationary;
mod suite;
mod wstab;

pub use absorption::{absorption_probability, AbsorptionEstimate};
pub use clt::{berry_esseen_anchor, clt_test, clt_test_discrete, poisson_third_moment, AnchorResult, CltResult};
pub use coupling::{delta_cauchy, quantile_mean, second_moment_slope, DeltaCauchy, QuantileMean, SecondMomentSlope};
pub use rewiring::{kernel_tv_sweep, rewiring_coupling_experiment, RewiringExperiment, TvSweep};
pub use stationary::{conditional_agreement, discrete_weighted_agreement, stationary_agreement, ConditionalAgreement};
pub use suite::{run_suite, Suite, SuiteParams};
pub use wstab::{w_stabilization, w_stabilization_discrete, WStabilization};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::forward::SolverError;
use crate::model::ModelError;
use crate::tagged::SimError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// One thresholded statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// "<=", ">=", "<" or "==".
    pub relation: String,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, relation: "<=".into(), tolerance, pass: value <= tolerance }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, relation: ">=".into(), tolerance, pass: value >= tolerance }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: ok as u8 as f64, relation: "==".into(), tolerance: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config_digest: String,
    pub sample_size: u64,
    pub statistics: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub status: Status,
    pub seeds: Vec<u64>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config_digest: String, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config_digest,
            sample_size: 0,
            statistics: BTreeMap::new(),
            checks: Vec::new(),
            status: Status::Pass,
            seeds: vec![seed],
            notes: Vec::new(),
        }
    }

    pub fn stat<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).expect("statistics serialize");
        self.statistics.insert(key.into(), v);
    }

    pub fn check(&mut self, c: Check) {
        if !c.pass && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.checks.push(c);
    }

    pub fn inconclusive(&mut self, why: &str) {
        self.status = Status::Inconclusive;
        self.notes.push(why.into());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// sha256 of the compact JSON form.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let hash = Sha256::digest(&bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let phat = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (phat + z2 / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Median of a slice (sorted copy); NaN when empty.
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation quantile; NaN when empty.
pub fn quantile(xs: &[f64], level: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = level * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Least-squares slope of y on x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        assert_eq!(wilson(0, 0, 1.96), (0.0, 1.0));
    }

    #[test]
    fn digest_is_stable() {
        let a = config_digest(&serde_json::json!({"p": 0.4, "q": 0.55}));
        assert_eq!(a, config_digest(&serde_json::json!({"q": 0.55, "p": 0.4})));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.25), 2.5);
        assert!((ls_slope(&[1.0, 2.0, 3.0], &[2.0, 0.0, -2.0]) + 2.0).abs() < 1e-15);
    }
}
