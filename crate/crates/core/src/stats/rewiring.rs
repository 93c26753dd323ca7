use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ls_slope, wilson, StatError};
use crate::model::{ModelError, ModelSpec};
use crate::tagged::{kernel_tv, kernel_tv_bound, kernel_tv_corrected_bound, simulate_rewiring_pair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvSweep {
    pub rows: u64,
    /// Rows whose exact TV gap exceeds r(k+2)/(m(m+1)).
    pub violations: u64,
    /// max TV / (r(k+2)/(m(m+1))) and where it occurs.
    pub worst_ratio: f64,
    pub worst_k: usize,
    pub worst_m: usize,
    /// max TV / (r(2k+3)/(m(m+1))).
    pub corrected_worst_ratio: f64,
}

/// Exact one-step kernel gaps for 0 ≤ k ≤ min(k_max, m − 1), 1 ≤ m ≤ m_max.
pub fn kernel_tv_sweep(spec: &ModelSpec, k_max: usize, m_max: usize) -> Result<TvSweep, StatError> {
    let r = spec.rewiring().ok_or(ModelError::MissingVariant("rewiring"))?.r;
    let pairs: Vec<(usize, usize)> = (1..=m_max).flat_map(|m| (0..m.min(k_max + 1)).map(move |k| (k, m))).collect();
    let gaps: Vec<(usize, usize, f64)> = pairs
        .par_iter()
        .map(|&(k, m)| Ok((k, m, kernel_tv(spec, k, m)?)))
        .collect::<Result<_, ModelError>>()?;
    let mut out = TvSweep { rows: gaps.len() as u64, violations: 0, worst_ratio: 0.0, worst_k: 0, worst_m: 0, corrected_worst_ratio: 0.0 };
    if r == 0.0 {
        return Ok(out);
    }
    for &(k, m, tv) in &gaps {
        let bound = kernel_tv_bound(r, k, m);
        let ratio = tv / bound;
        if tv > bound * (1.0 + 1e-12) {
            out.violations += 1;
        }
        if ratio > out.worst_ratio {
            out.worst_ratio = ratio;
            out.worst_k = k;
            out.worst_m = m;
        }
        out.corrected_worst_ratio = out.corrected_worst_ratio.max(tv / kernel_tv_corrected_bound(r, k, m));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewiringExperiment {
    pub j1: u64,
    pub m1s: Vec<u64>,
    pub horizon_factor: u64,
    pub pairs: u64,
    pub diverged: Vec<u64>,
    pub fractions: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    /// Log-log slope of the divergence fraction against m1 (zero counts
    /// replaced by 1/2 for the fit).
    pub slope: f64,
    /// Each fraction is at most the upper CI end of the previous one.
    pub monotone: bool,
}

/// Fraction of maximally coupled (Ŷ^(r), Y^(r)) pairs that ever separate
/// between m1 and horizon_factor·m1, for each m1.
pub fn rewiring_coupling_experiment(
    spec: &ModelSpec,
    j1: u64,
    m1s: &[u64],
    horizon_factor: u64,
    n: u64,
    seed: u64,
) -> Result<RewiringExperiment, StatError> {
    spec.rewiring().ok_or(ModelError::MissingVariant("rewiring"))?;
    if m1s.is_empty() || horizon_factor < 1 || n == 0 {
        return Err(StatError::InvalidArgument("need m1 values, horizon factor >= 1 and N > 0"));
    }
    let mut diverged = Vec::with_capacity(m1s.len());
    for (i, &m1) in m1s.iter().enumerate() {
        let stream = seed.wrapping_add(i as u64);
        let flags: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|p| Ok(simulate_rewiring_pair(spec, j1, m1, m1 * horizon_factor, stream, p)?.diverged))
            .collect::<Result<_, StatError>>()?;
        diverged.push(flags.iter().filter(|&&d| d).count() as u64);
    }
    let nf = n as f64;
    let fractions: Vec<f64> = diverged.iter().map(|&d| d as f64 / nf).collect();
    let ci: Vec<(f64, f64)> = diverged.iter().map(|&d| wilson(d, n, 1.96)).collect();
    let x: Vec<f64> = m1s.iter().map(|&m| (m as f64).ln()).collect();
    let y: Vec<f64> = diverged.iter().map(|&d| (d as f64).max(0.5).ln() - nf.ln()).collect();
    let slope = if m1s.len() >= 2 { ls_slope(&x, &y) } else { f64::NAN };
    let monotone = (1..fractions.len()).all(|i| fractions[i] <= ci[i - 1].1);
    Ok(RewiringExperiment { j1, m1s: m1s.to_vec(), horizon_factor, pairs: n, diverged, fractions, ci, slope, monotone })
}
