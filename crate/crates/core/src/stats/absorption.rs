use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{wilson, StatError};
use crate::model::ModelSpec;
use crate::tagged::{simulate_basic_fast, simulate_ctmc, PathStatus, TaggedVariant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionEstimate {
    pub paths: u64,
    pub absorbed: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Alive at the horizon with state ≥ threshold (or event cap hit).
    pub surviving: u64,
    /// Alive at the horizon but below the threshold.
    pub undecided: u64,
}

/// Fraction of N paths absorbed by the horizon, with a Wilson 95% interval.
/// Basic specs use the skeleton simulator, others the event-driven one.
pub fn absorption_probability(
    spec: &ModelSpec,
    x0: u64,
    horizon: f64,
    threshold: f64,
    n: u64,
    seed: u64,
    event_cap: u64,
) -> Result<AbsorptionEstimate, StatError> {
    let outcomes: Vec<(bool, bool)> = if x0 == 0 {
        vec![(true, false); n as usize]
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let path = if spec.is_basic() {
                    simulate_basic_fast(spec, x0 as u128, horizon, &[], seed, i)?
                } else {
                    simulate_ctmc(spec, TaggedVariant::Base, x0, horizon, seed, i, event_cap)?
                };
                let absorbed = path.absorbed_at.is_some();
                let big = path.status == PathStatus::EventCapExceeded || path.final_state() as f64 >= threshold;
                Ok((absorbed, !absorbed && big))
            })
            .collect::<Result<_, StatError>>()?
    };
    let absorbed = outcomes.iter().filter(|o| o.0).count() as u64;
    let surviving = outcomes.iter().filter(|o| o.1).count() as u64;
    let (ci_low, ci_high) = wilson(absorbed, n, 1.96);
    Ok(AbsorptionEstimate {
        paths: n,
        absorbed,
        estimate: if n == 0 { f64::NAN } else { absorbed as f64 / n as f64 },
        ci_low,
        ci_high,
        surviving,
        undecided: n - absorbed - surviving,
    })
}
