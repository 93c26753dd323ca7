use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quantile::landing_step;
use super::SimError;
use crate::model::thinning::sample_row;
use crate::model::{q_row, ModelError, ModelSpec, QRow, RowVariant};
use crate::rng::{stream_rng, Stream};

/// Result of one coupled run of Ŷ^(r) (size-m kernel) and Y^(r) (limit kernel).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewiringPairOutcome {
    pub diverged: bool,
    /// Graph size at which the chains first differed.
    pub diverged_at: Option<u64>,
    /// Common state at the end (or at divergence).
    pub state: u64,
}

fn dense(row: &QRow, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for e in &row.entries {
        v[e.target] += e.rate;
    }
    v[row.state] += row.diagonal;
    v
}

/// Exact total-variation distance between the one-step kernels
/// I + Q^(r,m)/(m+1) and I + Q^(r)/(m+1) from state k.
pub fn kernel_tv(spec: &ModelSpec, k: usize, m: usize) -> Result<f64, ModelError> {
    let hat = q_row(spec, RowVariant::RewiringAt(m), k)?;
    let lim = q_row(spec, RowVariant::RewiringLimit, k)?;
    let len = hat.max_target().max(lim.max_target()) + 1;
    let (a, b) = (dense(&hat, len), dense(&lim, len));
    let l1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    Ok(0.5 * l1 / (m as f64 + 1.0))
}

/// The bound r(k+2)/(m(m+1)) quoted for the kernel gap.
pub fn kernel_tv_bound(r: f64, k: usize, m: usize) -> f64 {
    let mf = m as f64;
    r * (k as f64 + 2.0) / (mf * (mf + 1.0))
}

/// r(2k+3)/(m(m+1)): also accounts for the mean shift r(k+1)/m of the extra-link law.
pub fn kernel_tv_corrected_bound(r: f64, k: usize, m: usize) -> f64 {
    let mf = m as f64;
    r * (2.0 * k as f64 + 3.0) / (mf * (mf + 1.0))
}

/// Per-candidate jump laws (off-diagonal rates over c̄, stay mass at k).
fn candidate_law(row: &QRow, len: usize, cbar: f64) -> Vec<f64> {
    let mut v = vec![0.0; len];
    let mut moved = 0.0;
    for e in &row.entries {
        let w = e.rate / cbar;
        v[e.target] += w;
        moved += w;
    }
    v[row.state] += (1.0 - moved).max(0.0);
    v
}

/// Runs the maximal coupling of the two chains from (j1, m1) to size m_end.
///
/// Candidate jumps arrive at the common per-step rate c̄/(l+1) with
/// c̄ = αk + r + 1; each candidate moves the pair through a maximal coupling
/// of the two conditional one-step laws.
pub fn simulate_rewiring_pair(
    spec: &ModelSpec,
    j1: u64,
    m1: u64,
    m_end: u64,
    seed: u64,
    path: u64,
) -> Result<RewiringPairOutcome, SimError> {
    let r = spec.rewiring().ok_or(ModelError::MissingVariant("rewiring"))?.r;
    if m1 == 0 || j1 >= m1 {
        return Err(SimError::InconsistentStart { j0: j1, m0: m1 });
    }
    let mut clock = stream_rng(seed, path, Stream::Clock);
    let mut coup = stream_rng(seed, path, Stream::Coupling);
    let mut jump = stream_rng(seed, path, Stream::Jump);
    let mut limit_rows: HashMap<usize, QRow> = HashMap::new();

    let mut k = j1;
    let mut m = m1;
    loop {
        let ku = k as usize;
        let cbar = spec.alpha_k(ku.max(1)) * k as f64 + r + 1.0;
        if cbar / (m as f64 + 1.0) > 1.0 {
            return Err(SimError::NonStochastic { m, k, prob: cbar / (m as f64 + 1.0) });
        }
        let n = landing_step(m, 0.0, cbar, clock.random::<f64>());
        if n > m_end as f64 {
            return Ok(RewiringPairOutcome { diverged: false, diverged_at: None, state: k });
        }
        let n = n as u64;
        let l = (n - 1) as usize;
        let hat = q_row(spec, RowVariant::RewiringAt(l), ku)?;
        if let std::collections::hash_map::Entry::Vacant(e) = limit_rows.entry(ku) {
            e.insert(q_row(spec, RowVariant::RewiringLimit, ku)?);
        }
        let lim = &limit_rows[&ku];
        let len = hat.max_target().max(lim.max_target()) + 1;
        let a = candidate_law(&hat, len, cbar);
        let b = candidate_law(lim, len, cbar);
        let overlap: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
        let common: f64 = overlap.iter().sum();
        if coup.random::<f64>() >= common {
            return Ok(RewiringPairOutcome { diverged: true, diverged_at: Some(n), state: k });
        }
        k = sample_row(&overlap.iter().map(|w| w / common).collect::<Vec<_>>(), &mut jump) as u64;
        m = n;
        if m >= m_end {
            return Ok(RewiringPairOutcome { diverged: false, diverged_at: None, state: k });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RewiringMode;

    fn spec(r: f64) -> ModelSpec {
        ModelSpec::basic(0.5, 0.2).unwrap().with_rewiring(r, RewiringMode::Independent).unwrap()
    }

    #[test]
    fn zero_rate_never_diverges() {
        let s = spec(0.0);
        for i in 0..200 {
            let o = simulate_rewiring_pair(&s, 2, 50, 5000, 1, i).unwrap();
            assert!(!o.diverged);
        }
        assert!(kernel_tv(&s, 3, 10).unwrap() < 1e-15);
    }

    #[test]
    fn corrected_bound_holds() {
        for r in [0.5, 1.0, 2.0] {
            let s = spec(r);
            for m in [5usize, 20, 100, 1000] {
                for k in 0..m.min(51) {
                    let tv = kernel_tv(&s, k, m).unwrap();
                    assert!(tv <= kernel_tv_corrected_bound(r, k, m) * (1.0 + 1e-9), "r {r} k {k} m {m}: {tv}");
                }
            }
        }
    }

    #[test]
    fn divergence_rarer_for_late_starts() {
        let s = spec(1.0);
        let frac = |m1: u64| {
            (0..2000).filter(|&i| simulate_rewiring_pair(&s, 2, m1, 10 * m1, 5, i).unwrap().diverged).count()
        };
        assert!(frac(1000) < frac(100));
    }
}
