use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ls_slope, median, StatError};
use crate::model::ModelSpec;
use crate::rng::{stream_rng, Stream};
use crate::tagged::{build_coupled_pair, c_phi, quantile_couple, CoupledDraw};

fn draws(m: u64, a: f64, b: f64, phi: f64, n: u64, seed: u64) -> Result<Vec<CoupledDraw>, StatError> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let u: f64 = stream_rng(seed, i, Stream::Coupling).random();
            Ok(quantile_couple(m, a, b, u, phi)?)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileMean {
    pub m: u64,
    pub b: f64,
    pub samples: u64,
    pub mean_v: f64,
    pub std_error: f64,
    /// (mean − 1/b)/std_error.
    pub z_score: f64,
    pub sandwich_violations: u64,
}

/// Mean of V_0(m, b) against 1/b, and pathwise sandwich violations.
pub fn quantile_mean(m: u64, b: f64, phi: f64, n: u64, seed: u64) -> Result<QuantileMean, StatError> {
    let ds = draws(m, 0.0, b, phi, n, seed)?;
    let nf = n as f64;
    let mean = ds.iter().map(|d| d.v).sum::<f64>() / nf;
    let var = ds.iter().map(|d| (d.v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let se = (var / nf).sqrt();
    let c = c_phi(phi);
    let denom = m as f64 + 1.0;
    let violations = ds
        .iter()
        .filter(|d| {
            let gap = d.e_b - d.v;
            let slack = 1e-12 * (1.0 + d.e_b.abs());
            gap < -1.0 / (d.r + 1.0) - slack || gap > c * b * d.v / denom + slack
        })
        .count() as u64;
    Ok(QuantileMean { m, b, samples: n, mean_v: mean, std_error: se, z_score: (mean - 1.0 / b) / se, sandwich_violations: violations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentSlope {
    pub ms: Vec<u64>,
    pub second_moments: Vec<f64>,
    /// Log-log least-squares slope of E(E_b − V)² against m + 1.
    pub slope: f64,
}

pub fn second_moment_slope(ms: &[u64], b: f64, phi: f64, n: u64, seed: u64) -> Result<SecondMomentSlope, StatError> {
    let mut moments = Vec::with_capacity(ms.len());
    for (i, &m) in ms.iter().enumerate() {
        let ds = draws(m, 0.0, b, phi, n, seed.wrapping_add(i as u64))?;
        moments.push(ds.iter().map(|d| (d.e_b - d.v).powi(2)).sum::<f64>() / n as f64);
    }
    let x: Vec<f64> = ms.iter().map(|&m| (m as f64 + 1.0).ln()).collect();
    let y: Vec<f64> = moments.iter().map(|v| v.ln()).collect();
    Ok(SecondMomentSlope { ms: ms.to_vec(), slope: ls_slope(&x, &y), second_moments: moments })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCauchy {
    pub n0s: Vec<usize>,
    /// Median over pairs of sup_{n0 ≤ n ≤ n_jumps}|Δ_n − Δ_{n0}|.
    pub medians: Vec<f64>,
    /// Mean of (Δ_n − Δ_{n/2})² at n = n_jumps.
    pub mean_square_half: f64,
    pub pairs: u64,
    pub complete_pairs: u64,
    pub identity_holds: bool,
}

/// Cauchy behaviour of the time shift Δ_n over coupled pairs that reach `n_jumps`.
pub fn delta_cauchy(
    spec: &ModelSpec,
    j0: u64,
    m0: u64,
    n0s: &[usize],
    n_jumps: usize,
    pairs: u64,
    seed: u64,
) -> Result<DeltaCauchy, StatError> {
    if n0s.iter().any(|&n0| n0 > n_jumps) {
        return Err(StatError::InvalidArgument("every n0 must be at most the number of jumps"));
    }
    let built: Vec<_> = (0..pairs)
        .into_par_iter()
        .map(|i| build_coupled_pair(spec, j0, m0, n_jumps, seed, i))
        .collect::<Result<_, _>>()?;
    let identity_holds = built.iter().all(|p| p.identity_holds());
    let full: Vec<_> = built.iter().filter(|p| p.jumps() == n_jumps).collect();
    let medians = n0s
        .iter()
        .map(|&n0| {
            let sups: Vec<f64> = full
                .iter()
                .map(|p| {
                    let base = p.delta_n(n0);
                    (n0..=n_jumps).map(|n| (p.delta_n(n) - base).abs()).fold(0.0, f64::max)
                })
                .collect();
            median(&sups)
        })
        .collect();
    let ms = full.iter().map(|p| (p.delta_n(n_jumps) - p.delta_n(n_jumps / 2)).powi(2)).sum::<f64>()
        / full.len().max(1) as f64;
    Ok(DeltaCauchy {
        n0s: n0s.to_vec(),
        medians,
        mean_square_half: ms,
        pairs,
        complete_pairs: full.len() as u64,
        identity_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_matches_inverse_rate() {
        let q = quantile_mean(10, 0.5, 0.9, 100_000, 1).unwrap();
        assert!(q.z_score.abs() < 4.0, "{q:?}");
        assert_eq!(q.sandwich_violations, 0);
    }

    #[test]
    fn cauchy_medians_shrink() {
        let s = ModelSpec::basic(0.4, 0.55).unwrap();
        let d = delta_cauchy(&s, 1, 2, &[10, 100, 1000], 2000, 300, 3).unwrap();
        assert!(d.identity_holds);
        assert!(d.medians[2] < d.medians[0], "{:?}", d.medians);
    }
}
