use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quantile::{default_phi, quantile_couple};
use super::SimError;
use crate::model::thinning::sample_row;
use crate::model::ModelSpec;
use crate::rng::{stream_rng, Stream};
use crate::special::harmonic_diff;

/// A continuous chain X and a harmonic-clock discrete chain Y^(h) built on
/// one jump chain, with holding times tied through the quantile coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub j0: u64,
    pub m0: u64,
    /// Jump chain X̂_0, X̂_1, ...
    pub states: Vec<u64>,
    /// Continuous jump times S_n (S_0 = 0).
    pub s: Vec<f64>,
    /// Harmonic jump times S̃_n = h_0(N_n) − h_0(m0).
    pub s_tilde: Vec<f64>,
    /// Graph sizes N_n right after each discrete jump (N_0 = m0).
    pub sizes: Vec<f64>,
    /// Absorbed before the requested number of jumps.
    pub absorbed: bool,
}

impl CoupledPair {
    pub fn jumps(&self) -> usize {
        self.states.len() - 1
    }

    /// Δ_n = S_n − S̃_n.
    pub fn delta_n(&self, n: usize) -> f64 {
        self.s[n] - self.s_tilde[n]
    }

    fn segment(&self, t: f64) -> usize {
        self.s_tilde.partition_point(|&x| x <= t).saturating_sub(1)
    }

    /// Piecewise-linear Δ(t); constant after the last recorded jump.
    pub fn delta(&self, t: f64) -> f64 {
        let n = self.segment(t);
        if n + 1 >= self.s.len() {
            return self.delta_n(n);
        }
        let (a, b) = (self.s_tilde[n], self.s_tilde[n + 1]);
        let w = (t - a) / (b - a);
        (1.0 - w) * self.delta_n(n) + w * self.delta_n(n + 1)
    }

    /// t + Δ(t), computed so that it hits S_n exactly at t = S̃_n.
    pub fn shifted_time(&self, t: f64) -> f64 {
        let n = self.segment(t);
        if n + 1 >= self.s.len() {
            return self.s[n] + (t - self.s_tilde[n]);
        }
        let (a, b) = (self.s_tilde[n], self.s_tilde[n + 1]);
        self.s[n] + (t - a) * (self.s[n + 1] - self.s[n]) / (b - a)
    }

    /// Y^(h)_t.
    pub fn y_h(&self, t: f64) -> u64 {
        self.states[self.segment(t)]
    }

    /// X_s.
    pub fn x_at(&self, s: f64) -> u64 {
        self.states[self.s.partition_point(|&x| x <= s).saturating_sub(1)]
    }

    /// Y_m on the size clock.
    pub fn y_at_size(&self, m: f64) -> u64 {
        self.states[self.sizes.partition_point(|&x| x <= m).saturating_sub(1)]
    }

    /// Checks Y^(h)_t = X_{t+Δ(t)} at every jump time and segment midpoint.
    pub fn identity_holds(&self) -> bool {
        (0..self.s.len()).all(|n| {
            let t = self.s_tilde[n];
            let ok = self.y_h(t) == self.x_at(self.shifted_time(t));
            let mid = match self.s_tilde.get(n + 1) {
                Some(&b) if b.is_finite() => {
                    let tm = 0.5 * (t + b);
                    self.y_h(tm) == self.x_at(self.shifted_time(tm))
                }
                _ => true,
            };
            ok && mid
        })
    }
}

/// Builds one coupled pair from (j0, m0) for up to `n_jumps` jumps.
pub fn build_coupled_pair(spec: &ModelSpec, j0: u64, m0: u64, n_jumps: usize, seed: u64, path: u64) -> Result<CoupledPair, SimError> {
    if !spec.is_basic() {
        return Err(SimError::NotBasic);
    }
    if j0 == 0 || j0 > m0.max(1) {
        return Err(SimError::InconsistentStart { j0, m0 });
    }
    let alpha = spec.alpha();
    let beta = spec.beta();
    let phi = default_phi(alpha);
    let mut clock = stream_rng(seed, path, Stream::Clock);
    let mut jump = stream_rng(seed, path, Stream::Jump);

    let mut pair = CoupledPair {
        j0,
        m0,
        states: vec![j0],
        s: vec![0.0],
        s_tilde: vec![0.0],
        sizes: vec![m0 as f64],
        absorbed: false,
    };
    let mut k = j0;
    let mut size = m0 as f64;
    for _ in 0..n_jumps {
        if k == 0 {
            pair.absorbed = true;
            break;
        }
        let ku = k as usize;
        let row = spec.thinning().row(ku);
        let stay = row[ku];
        let up = k as f64 * alpha;
        let exit = up + beta * (1.0 - stay);
        let u: f64 = clock.random();
        let draw = quantile_couple(size as u64, 0.0, exit, u, phi)?;
        let s_next = pair.s.last().unwrap() + draw.e_b;
        let landing = draw.landing();
        let st_next = pair.s_tilde.last().unwrap() + harmonic_diff(0.0, size as u64, landing);
        let v: f64 = jump.random();
        k = if v * exit < up {
            k + 1
        } else {
            let mut off = row;
            off[ku] = 0.0;
            let total: f64 = off.iter().sum();
            off.iter_mut().for_each(|w| *w /= total);
            sample_row(&off, &mut jump) as u64
        };
        size = landing;
        pair.states.push(k);
        pair.s.push(s_next);
        pair.s_tilde.push(st_next);
        pair.sizes.push(size);
        if !landing.is_finite() {
            break;
        }
    }
    if k == 0 && pair.jumps() < n_jumps {
        pair.absorbed = true;
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_jumps() {
        let s = ModelSpec::basic(0.5, 0.2).unwrap();
        let pair = build_coupled_pair(&s, 1, 2, 0, 1, 0).unwrap();
        assert_eq!(pair.delta_n(0), 0.0);
        assert_eq!(pair.delta(3.0), 0.0);
    }

    #[test]
    fn identity_exact() {
        let s = ModelSpec::basic(0.5, 0.2).unwrap();
        for i in 0..50 {
            let pair = build_coupled_pair(&s, 1, 2, 500, 3, i).unwrap();
            assert!(pair.identity_holds());
            for n in 0..pair.s.len() {
                assert_eq!(pair.shifted_time(pair.s_tilde[n]), pair.s[n]);
            }
            if pair.absorbed {
                assert_eq!(*pair.states.last().unwrap(), 0);
            }
        }
    }
}
