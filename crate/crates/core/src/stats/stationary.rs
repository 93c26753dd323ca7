use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatError;
use crate::forward::{conditional_limit, stationary_weighted, TruncatedGenerator, Uniformizer, DEFAULT_POISSON_TOL};
use crate::model::{classify, ModelSpec, Process, RowVariant, Verdict};
use crate::tagged::{occupation_weighted, simulate_ctmc, simulate_discrete_tagged, DiscreteOptions, DiscreteVariant, TaggedVariant};

fn require_ergodic(spec: &ModelSpec) -> Result<(), StatError> {
    let r = classify(spec, Process::XTilde);
    if r.verdict != Verdict::GeometricallyErgodic {
        return Err(StatError::RegimeMismatch(format!("X-tilde is {:?} (margin {})", r.verdict, r.margin)));
    }
    Ok(())
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Sup-norm distance between the time-weighted occupation law of one long X̃
/// run and the solver's stationary vector on {1..K−1}. Slot K is left out: the
/// run lumps every state ≥ K there, the solver reflects at K.
pub fn stationary_agreement(spec: &ModelSpec, burn_in: u64, run_len: u64, k_max: usize, seed: u64) -> Result<f64, StatError> {
    require_ergodic(spec)?;
    let (pi, _) = stationary_weighted(spec, k_max)?;
    let occ = occupation_weighted(spec, 1, burn_in, run_len, k_max, seed, 0)?;
    Ok(sup(&occ[..k_max], &pi[..k_max]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalAgreement {
    pub t: f64,
    /// P[X_t = · | X_t ≥ 1] from the semigroup vs the conditional limit.
    pub solver_sup: f64,
    /// Monte Carlo estimate vs the conditional limit.
    pub mc_sup: f64,
    pub paths: u64,
    pub boundary_mass: f64,
}

/// Mass at j divided by j, renormalized.
fn reweight(tilde: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = tilde.iter().enumerate().map(|(j, x)| if j == 0 { 0.0 } else { x / j as f64 }).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    out
}

/// Conditional law of X_t given X_t ≥ 1, from X_0 = 1.
///
/// The Monte Carlo side runs X̃ from 1 and reweights by 1/X̃_t, which by the
/// quasi-stationarity identity gives the law of X_t given X_t ≥ 1; direct
/// simulation of X would see almost no survivors at large t.
pub fn conditional_agreement(spec: &ModelSpec, t: f64, n: u64, k_max: usize, seed: u64) -> Result<ConditionalAgreement, StatError> {
    require_ergodic(spec)?;
    let limit = conditional_limit(spec, k_max, 1e-3)?;
    // Same reweighting on the solver side. The reflected X̃ truncation keeps
    // the excursions above K that a leaking X truncation would condition away.
    let gen = TruncatedGenerator::new(spec, RowVariant::Weighted, k_max)?.reflecting();
    let mut start = vec![0.0; k_max + 1];
    start[1] = 1.0;
    let tilde = Uniformizer::new(gen).advance(&start, t, DEFAULT_POISSON_TOL);
    let solver_sup = sup(&reweight(&tilde), limit.conditional.mass());

    let finals: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|i| Ok(simulate_ctmc(spec, TaggedVariant::Weighted, 1, t, seed, i, u64::MAX)?.final_state() as u64))
        .collect::<Result<_, StatError>>()?;
    let mut counts = vec![0.0; k_max + 1];
    for &j in &finals {
        counts[(j as usize).min(k_max)] += 1.0;
    }
    let est = reweight(&counts);
    Ok(ConditionalAgreement {
        t,
        solver_sup,
        mc_sup: sup(&est, limit.conditional.mass()),
        paths: n,
        boundary_mass: limit.boundary_mass,
    })
}

/// Empirical law of Ỹ_m over N runs from (1, 1) against the stationary vector of X̃.
pub fn discrete_weighted_agreement(spec: &ModelSpec, m: u64, n: u64, k_max: usize, seed: u64) -> Result<f64, StatError> {
    require_ergodic(spec)?;
    let (pi, _) = stationary_weighted(spec, k_max)?;
    let opts = DiscreteOptions { relaxed_start: true, skeleton: Some(vec![m]) };
    let finals: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let path = simulate_discrete_tagged(spec, DiscreteVariant::Weighted, 1, 1, m, seed, i, &opts)?;
            Ok(path.state_at(m as f64) as u64)
        })
        .collect::<Result<_, StatError>>()?;
    let mut emp = vec![0.0; k_max + 1];
    for &j in &finals {
        emp[(j as usize).min(k_max)] += 1.0 / n as f64;
    }
    Ok(sup(&emp[..k_max], &pi[..k_max]))
}
