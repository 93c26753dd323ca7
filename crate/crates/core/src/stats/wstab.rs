use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{median, quantile, StatError};
use crate::model::ModelSpec;
use crate::tagged::{
    simulate_basic_fast, simulate_discrete_tagged, w_limit_samples, DiscreteOptions, DiscreteVariant, PathSample,
};

/// Minimum survivor count for a conclusive verdict.
pub const MIN_SURVIVORS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WStabilization {
    /// Horizons T (or sizes m).
    pub horizons: Vec<f64>,
    /// Median of |log W_T − log W_{T/2}| among survivors, per horizon.
    pub medians: Vec<f64>,
    pub lower_quartiles: Vec<f64>,
    pub upper_quartiles: Vec<f64>,
    pub paths: u64,
    pub survivors: u64,
    pub strictly_decreasing: bool,
    pub conclusive: bool,
}

fn summarize(paths: &[PathSample], horizons: &[f64], alpha: f64, p: f64, threshold: f64) -> Result<WStabilization, StatError> {
    let mut marks = Vec::with_capacity(2 * horizons.len());
    for &t in horizons {
        marks.push(t / 2.0);
        marks.push(t);
    }
    let recs = w_limit_samples(paths, &marks, alpha, p, threshold)?;
    let survivors: Vec<_> = recs.iter().filter(|r| r.surviving).collect();
    let mut medians = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for i in 0..horizons.len() {
        let d: Vec<f64> = survivors.iter().map(|r| (r.log_w[2 * i + 1] - r.log_w[2 * i]).abs()).collect();
        medians.push(median(&d));
        lo.push(quantile(&d, 0.25));
        hi.push(quantile(&d, 0.75));
    }
    let conclusive = survivors.len() >= MIN_SURVIVORS;
    Ok(WStabilization {
        horizons: horizons.to_vec(),
        strictly_decreasing: conclusive && medians.windows(2).all(|w| w[1] < w[0]),
        medians,
        lower_quartiles: lo,
        upper_quartiles: hi,
        paths: paths.len() as u64,
        survivors: survivors.len() as u64,
        conclusive,
    })
}

fn sorted(list: &[f64]) -> Result<Vec<f64>, StatError> {
    if list.is_empty() || list.iter().any(|t| !(*t > 0.0)) {
        return Err(StatError::InvalidArgument("horizons must be positive"));
    }
    let mut v = list.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Spread of |log W_T − log W_{T/2}| among paths surviving to the largest T.
pub fn w_stabilization(
    spec: &ModelSpec,
    x0: u64,
    t_list: &[f64],
    n: u64,
    seed: u64,
    threshold: f64,
) -> Result<WStabilization, StatError> {
    let ts = sorted(t_list)?;
    let t_max = *ts.last().unwrap();
    let marks: Vec<f64> = ts.iter().flat_map(|&t| [t / 2.0, t]).collect();
    let paths: Vec<PathSample> = (0..n)
        .into_par_iter()
        .map(|i| simulate_basic_fast(spec, x0 as u128, t_max, &marks, seed, i))
        .collect::<Result<_, _>>()?;
    summarize(&paths, &ts, spec.alpha(), spec.p(), threshold)
}

/// Discrete analogue with m^{−α}p^{−J_m}Y_m over the sizes in `m_list`.
pub fn w_stabilization_discrete(
    spec: &ModelSpec,
    j0: u64,
    m0: u64,
    m_list: &[u64],
    n: u64,
    seed: u64,
    threshold: f64,
) -> Result<WStabilization, StatError> {
    let ms = sorted(&m_list.iter().map(|&m| m as f64).collect::<Vec<_>>())?;
    if ms[0] / 2.0 < m0 as f64 || ms.iter().any(|m| m.fract() != 0.0 || (m / 2.0).fract() != 0.0) {
        return Err(StatError::InvalidArgument("sizes must be even and at least 2 m0"));
    }
    let m_max = *ms.last().unwrap() as u64;
    let marks: Vec<u64> = ms.iter().flat_map(|&m| [(m / 2.0) as u64, m as u64]).collect();
    let opts = DiscreteOptions { relaxed_start: j0 >= m0, skeleton: Some(marks) };
    let paths: Vec<PathSample> = (0..n)
        .into_par_iter()
        .map(|i| simulate_discrete_tagged(spec, DiscreteVariant::Plain, j0, m0, m_max, seed, i, &opts))
        .collect::<Result<_, _>>()?;
    summarize(&paths, &ms, spec.alpha(), spec.p(), threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbed_only_sample_is_inconclusive() {
        // Deep in the absorbing regime nothing survives to T = 40.
        let s = ModelSpec::basic(0.1, 0.0).unwrap();
        let r = w_stabilization(&s, 1, &[20.0, 40.0], 300, 1, 50.0).unwrap();
        assert!(!r.conclusive);
        assert!(!r.strictly_decreasing);
    }

    #[test]
    fn pure_birth_fluctuation_scale() {
        // No catastrophes after T/2: log W moves like the Yule martingale, O(x^{−1/2}).
        let s = ModelSpec::basic(0.5, 0.999_999_999).unwrap();
        let r = w_stabilization(&s, 100, &[4.0], 2000, 4, 1.0).unwrap();
        let x_half = 100.0 * (s.alpha() * 2.0).exp();
        assert!(r.medians[0] < 3.0 / x_half.sqrt(), "{:?}", r.medians);
    }
}
