use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{wilson, StatError};
use crate::model::ModelSpec;
use crate::rng::{stream_rng, Stream};
use crate::special::{normal_cdf, poisson_pmf};
use crate::tagged::{simulate_basic_fast, simulate_discrete_tagged, DiscreteOptions, DiscreteVariant};

pub const GRID_POINTS: usize = 41;
const BERRY_ESSEEN: f64 = 0.4748;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub y: f64,
    pub empirical: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltResult {
    pub nu: f64,
    pub v2: f64,
    /// Time scale: T, or log m for the discrete chain.
    pub scale: f64,
    pub paths: u64,
    pub survival_fraction: f64,
    pub survival_ci: (f64, f64),
    pub max_deviation: f64,
    pub grid: Vec<GridPoint>,
}

fn nu_v2(spec: &ModelSpec) -> Result<(f64, f64), StatError> {
    if !spec.is_basic() {
        return Err(StatError::Sim(crate::tagged::SimError::NotBasic));
    }
    let l = spec.log_inv_p();
    let nu = spec.alpha() - spec.beta() * l;
    if nu <= 0.0 {
        return Err(StatError::RegimeMismatch(format!("needs nu = alpha - beta log(1/p) > 0, got {nu}")));
    }
    Ok((nu, spec.beta() * l * l))
}

/// Compares P̂[(log X − ν s)/√s ≥ y] with P̂[survive](1 − Φ(y/v)) on a fixed grid.
/// `logs` holds ln X at scale s, or None for absorbed paths.
fn compare(nu: f64, v2: f64, scale: f64, logs: &[Option<f64>]) -> CltResult {
    let n = logs.len() as u64;
    let stats: Vec<f64> = logs.iter().flatten().map(|lx| (lx - nu * scale) / scale.sqrt()).collect();
    let alive = stats.len() as u64;
    let surv = alive as f64 / n as f64;
    let v = v2.sqrt();
    let mut sorted = stats.clone();
    sorted.sort_by(f64::total_cmp);
    let mut grid = Vec::with_capacity(GRID_POINTS);
    let mut worst = 0.0f64;
    for i in 0..GRID_POINTS {
        let y = -4.0 * v + 8.0 * v * i as f64 / (GRID_POINTS - 1) as f64;
        let above = sorted.len() - sorted.partition_point(|&s| s < y);
        let empirical = above as f64 / n as f64;
        let target = surv * (1.0 - normal_cdf(y / v));
        worst = worst.max((empirical - target).abs());
        grid.push(GridPoint { y, empirical, target });
    }
    CltResult {
        nu,
        v2,
        scale,
        paths: n,
        survival_fraction: surv,
        survival_ci: wilson(alive, n, 1.96),
        max_deviation: worst,
        grid,
    }
}

/// Continuous-time check at horizon T with the skeleton simulator.
pub fn clt_test(spec: &ModelSpec, x0: u64, t: f64, n: u64, seed: u64) -> Result<CltResult, StatError> {
    let (nu, v2) = nu_v2(spec)?;
    let logs: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let path = simulate_basic_fast(spec, x0 as u128, t, &[], seed, i)?;
            let x = path.final_state();
            Ok((x > 0).then(|| (x as f64).ln()))
        })
        .collect::<Result<_, StatError>>()?;
    Ok(compare(nu, v2, t, &logs))
}

/// Discrete analogue: (log Y_m − ν log m)/√(log m) from the per-jump chain.
pub fn clt_test_discrete(spec: &ModelSpec, j0: u64, m0: u64, m: u64, n: u64, seed: u64) -> Result<CltResult, StatError> {
    let (nu, v2) = nu_v2(spec)?;
    let opts = DiscreteOptions { relaxed_start: j0 >= m0, skeleton: Some(vec![m]) };
    let logs: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let path = simulate_discrete_tagged(spec, DiscreteVariant::Plain, j0, m0, m, seed, i, &opts)?;
            let y = path.state_at(m as f64);
            Ok((y > 0).then(|| (y as f64).ln()))
        })
        .collect::<Result<_, StatError>>()?;
    Ok(compare(nu, v2, (m as f64).ln(), &logs))
}

/// E|Po(λ) − λ|³.
pub fn poisson_third_moment(lambda: f64) -> f64 {
    let (pmf, _) = poisson_pmf(lambda, 1e-18);
    pmf.iter().enumerate().map(|(j, w)| w * (j as f64 - lambda).abs().powi(3)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorResult {
    pub max_deviation: f64,
    /// 2C/√T with C = 0.4748 ρ/σ³ for unit-time Poisson increments.
    pub berry_esseen: f64,
    /// Four binomial standard errors at the worst case 1/2.
    pub mc_band: f64,
    pub tolerance: f64,
}

/// Harness sanity check on a pure Poisson counter: −(Z_T − βT)log(1/p)/√T
/// against N(0, β log²(1/p)).
pub fn berry_esseen_anchor(beta: f64, p: f64, t: f64, n: u64, seed: u64) -> Result<AnchorResult, StatError> {
    if !(beta > 0.0 && p > 0.0 && p < 1.0 && t > 0.0 && n > 0) {
        return Err(StatError::InvalidArgument("anchor needs beta > 0, 0 < p < 1, T > 0, N > 0"));
    }
    let l = -p.ln();
    let v = beta.sqrt() * l;
    let pois = Poisson::new(beta * t).expect("positive mean");
    let mut stats: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let z: f64 = pois.sample(&mut stream_rng(seed, i, Stream::Clock));
            -(z - beta * t) * l / t.sqrt()
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let mut worst = 0.0f64;
    for i in 0..GRID_POINTS {
        let y = -4.0 * v + 8.0 * v * i as f64 / (GRID_POINTS - 1) as f64;
        let above = stats.len() - stats.partition_point(|&s| s < y);
        let emp = above as f64 / n as f64;
        worst = worst.max((emp - (1.0 - normal_cdf(y / v))).abs());
    }
    let c = BERRY_ESSEEN * poisson_third_moment(beta) / beta.powf(1.5);
    let be = 2.0 * c / t.sqrt();
    let mc = 4.0 * 0.5 / (n as f64).sqrt();
    Ok(AnchorResult { max_deviation: worst, berry_esseen: be, mc_band: mc, tolerance: be + mc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_moment_of_unit_poisson() {
        assert!((poisson_third_moment(1.0) - (1.0 + 2.0 / std::f64::consts::E)).abs() < 1e-12);
    }

    #[test]
    fn grid_limits() {
        let r = compare(0.3, 0.4, 100.0, &[Some(30.0), None, Some(1000.0), None]);
        assert_eq!(r.survival_fraction, 0.5);
        let mid = &r.grid[GRID_POINTS / 2];
        assert!(mid.y.abs() < 1e-12);
        assert!((mid.target - 0.25).abs() < 1e-12);
        assert!((r.grid[0].target - 0.5 * (1.0 - normal_cdf(-4.0))).abs() < 1e-12);
    }

    #[test]
    fn regime_mismatch() {
        let s = ModelSpec::basic(0.3, 0.0).unwrap();
        assert!(matches!(clt_test(&s, 1, 10.0, 10, 0), Err(StatError::RegimeMismatch(_))));
    }

    #[test]
    fn anchor_within_bound() {
        let a = berry_esseen_anchor(0.45, 0.4, 100.0, 20_000, 3).unwrap();
        assert!(a.max_deviation <= a.tolerance, "{a:?}");
    }
}
