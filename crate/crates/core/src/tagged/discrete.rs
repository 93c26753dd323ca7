use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::path::{Clock, PathSample, Resolution};
use super::quantile::landing_step;
use super::SimError;
use crate::model::thinning::sample_binomial;
use crate::model::{ModelError, ModelSpec};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteVariant {
    /// Y: step matrix I + Q/(m+1).
    Plain,
    /// Ỹ: step matrix I + Q̃/(m+2α).
    Weighted,
    /// Ŷ^(r): step matrix I + Q^(r,m)/(m+1) at size m.
    RewiringInhomogeneous,
    /// Y^(r): step matrix I + Q^(r)/(m+1).
    RewiringLimit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteOptions {
    /// Allow j0 = m0 (the graph needs j0 ≤ m0 − 1).
    pub relaxed_start: bool,
    /// Record only these sizes (plus m_max and absorption) instead of every jump.
    pub skeleton: Option<Vec<u64>>,
}

/// Per-jump simulation of a discrete tagged chain from (j0, m0) up to size m_max.
///
/// Holding spans are drawn in one go from the V quantile, so the cost is per
/// jump, not per step. `times` holds graph sizes; `z_counts` holds J_m.
pub fn simulate_discrete_tagged(
    spec: &ModelSpec,
    variant: DiscreteVariant,
    j0: u64,
    m0: u64,
    m_max: u64,
    seed: u64,
    path: u64,
    opts: &DiscreteOptions,
) -> Result<PathSample, SimError> {
    let limit = if opts.relaxed_start { m0 } else { m0.saturating_sub(1) };
    if m0 == 0 || j0 > limit {
        return Err(SimError::InconsistentStart { j0, m0 });
    }
    if m_max < m0 {
        return Err(SimError::InvalidArgument("m_max must be at least m0"));
    }
    let r = match variant {
        DiscreteVariant::Weighted => {
            if j0 == 0 {
                return Err(SimError::InvalidArgument("the weighted chain lives on 1, 2, ..."));
            }
            if !spec.is_constrained() || !spec.has_retention() {
                return Err(ModelError::ConstraintViolated { k: j0 as usize, alpha_k: spec.alpha_k(j0 as usize), alpha: spec.alpha() }.into());
            }
            0.0
        }
        DiscreteVariant::RewiringInhomogeneous | DiscreteVariant::RewiringLimit => {
            spec.rewiring().ok_or(ModelError::MissingVariant("rewiring"))?.r
        }
        DiscreteVariant::Plain => 0.0,
    };

    let mut marks: Vec<u64> = match &opts.skeleton {
        Some(c) => {
            if let Some(&bad) = c.iter().find(|&&c| c > m_max) {
                return Err(SimError::CheckpointBeyondHorizon(bad as f64));
            }
            c.iter().copied().filter(|&c| c > m0).chain([m_max]).collect()
        }
        None => Vec::new(),
    };
    marks.sort_unstable();
    marks.dedup();
    let mut chain = Chain {
        spec,
        variant,
        r,
        clock: stream_rng(seed, path, Stream::Clock),
        jump: stream_rng(seed, path, Stream::Jump),
        thin: stream_rng(seed, path, Stream::Thinning),
        extra: stream_rng(seed, path, Stream::Extra),
    };
    let mut rec = Recorder {
        out: PathSample::start(Clock::Steps, Resolution::EventDriven, m0 as f64, j0 as u128, m_max as f64),
        marks,
        next: 0,
    };
    if opts.skeleton.is_some() {
        rec.out.resolution = Resolution::Skeleton;
    }

    let mut m = m0;
    let mut k = j0;
    let mut jumps = 0u64;
    while m < m_max {
        if k == 0 && matches!(variant, DiscreteVariant::Plain) {
            rec.out.absorbed_at = Some(m as f64);
            break;
        }
        let Some((n, next, catastrophe)) = chain.next_jump(k, m, m_max)? else {
            break;
        };
        rec.before(n, k, jumps);
        if catastrophe {
            jumps += 1;
        }
        k = next;
        m = n;
        rec.at(n, k, jumps);
    }
    rec.finish(m_max, k, jumps);
    Ok(rec.out)
}

struct Recorder {
    out: PathSample,
    marks: Vec<u64>,
    next: usize,
}

impl Recorder {
    fn skeleton(&self) -> bool {
        self.out.resolution == Resolution::Skeleton
    }

    /// Marks strictly before the landing size see the old state.
    fn before(&mut self, n: u64, k: u64, j: u64) {
        while self.next < self.marks.len() && self.marks[self.next] < n {
            self.out.push(self.marks[self.next] as f64, k as u128, j);
            self.next += 1;
        }
    }

    fn at(&mut self, n: u64, k: u64, j: u64) {
        let hit = self.next < self.marks.len() && self.marks[self.next] == n;
        if hit {
            self.next += 1;
        }
        if !self.skeleton() || hit || k == 0 {
            self.out.push(n as f64, k as u128, j);
        }
    }

    fn finish(&mut self, m_max: u64, k: u64, j: u64) {
        self.before(m_max + 1, k, j);
        if !self.skeleton() && *self.out.times.last().unwrap() < m_max as f64 {
            self.out.push(m_max as f64, k as u128, j);
        }
    }
}

struct Chain<'a> {
    spec: &'a ModelSpec,
    variant: DiscreteVariant,
    r: f64,
    clock: ChaCha8Rng,
    jump: ChaCha8Rng,
    thin: ChaCha8Rng,
    extra: ChaCha8Rng,
}

impl Chain<'_> {
    /// Per-step jump probability at size l is b/(l + a + 1).
    fn homogeneous_rate(&self, k: u64) -> (f64, f64) {
        let spec = self.spec;
        let ku = k as usize;
        let kf = k as f64;
        match self.variant {
            DiscreteVariant::Plain => (0.0, kf * spec.alpha_k(ku) + spec.beta_k(ku)),
            DiscreteVariant::Weighted => {
                let alpha = spec.alpha();
                (2.0 * alpha - 1.0, alpha * (kf + 1.0) + spec.p_k(ku) * spec.beta_k(ku))
            }
            _ => {
                let ku = ku.max(1);
                (0.0, spec.alpha_k(ku) * kf + self.r + 1.0)
            }
        }
    }

    /// Total per-step rate b_l of Q^(r,l) at size l: gain plus the copy clock.
    fn inhomogeneous_rate(&self, k: u64, l: u64) -> f64 {
        let ku = (k as usize).max(1);
        self.spec.alpha_k(ku) * k as f64 + self.r * (1.0 - (k + 1) as f64 / l as f64) + 1.0
    }

    /// (landing size, new state, catastrophe flag), or None past m_max.
    fn next_jump(&mut self, k: u64, mut m: u64, m_max: u64) -> Result<Option<(u64, u64, bool)>, SimError> {
        let (a, bbar) = self.homogeneous_rate(k);
        let thinned = self.variant == DiscreteVariant::RewiringInhomogeneous;
        loop {
            let denom = m as f64 + a + 1.0;
            if thinned && bbar >= 0.5 * denom {
                // Candidates would be rejected too often; go one step at a time.
                let prob = self.inhomogeneous_rate(k, m) / denom;
                check(prob, m, k)?;
                if self.clock.random::<f64>() < prob {
                    let (next, cat) = self.land(k, m);
                    return Ok(Some((m + 1, next, cat)));
                }
                m += 1;
                if m >= m_max {
                    return Ok(None);
                }
                continue;
            }
            check(bbar / denom, m, k)?;
            let n = landing_step(m, a, bbar, self.clock.random::<f64>());
            if n > m_max as f64 {
                return Ok(None);
            }
            let n = n as u64;
            let l = n - 1;
            if thinned && self.jump.random::<f64>() * bbar >= self.inhomogeneous_rate(k, l) {
                m = n;
                if m >= m_max {
                    return Ok(None);
                }
                continue;
            }
            let (next, cat) = self.land(k, l);
            return Ok(Some((n, next, cat)));
        }
    }

    fn extras(&mut self, k: u64, l: u64) -> u64 {
        if self.r <= 0.0 {
            return 0;
        }
        match self.variant {
            DiscreteVariant::RewiringInhomogeneous => {
                sample_binomial(l - 1 - k, (self.r / l as f64).min(1.0), &mut self.extra)
            }
            _ => rand_distr::Distribution::sample(&rand_distr::Poisson::new(self.r).expect("valid poisson"), &mut self.extra) as u64,
        }
    }

    /// Target of a jump taken on the step out of size l.
    fn land(&mut self, k: u64, l: u64) -> (u64, bool) {
        let spec = self.spec;
        let ku = k as usize;
        let kf = k as f64;
        let u: f64 = self.jump.random();
        match self.variant {
            DiscreteVariant::Plain => {
                let up = kf * spec.alpha_k(ku);
                if u * (up + spec.beta_k(ku)) < up {
                    (k + 1, false)
                } else {
                    (spec.thinning().sample(ku, &mut self.thin) as u64, true)
                }
            }
            DiscreteVariant::Weighted => {
                let up = spec.alpha() * (kf + 1.0);
                if u * (up + spec.p_k(ku) * spec.beta_k(ku)) < up {
                    (k + 1, false)
                } else {
                    (spec.thinning().sample_size_biased(ku, &mut self.thin) as u64, true)
                }
            }
            DiscreteVariant::RewiringInhomogeneous | DiscreteVariant::RewiringLimit => {
                let kk = ku.max(1);
                let gain = match self.variant {
                    DiscreteVariant::RewiringLimit => spec.alpha_k(kk) * kf + self.r,
                    _ => spec.alpha_k(kk) * kf + self.r * (1.0 - (k + 1) as f64 / l as f64),
                };
                let total = gain + 1.0;
                let x = u * total;
                if x < gain {
                    (k + 1, false)
                } else if x < gain + spec.q_k(kk) {
                    (k + self.extras(k, l), false)
                } else {
                    let kept = spec.thinning().sample(ku, &mut self.thin) as u64;
                    (kept + self.extras(k, l), true)
                }
            }
        }
    }
}

fn check(prob: f64, m: u64, k: u64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&prob) {
        Ok(())
    } else {
        Err(SimError::NonStochastic { m, k, prob })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RewiringMode;

    fn run(spec: &ModelSpec, v: DiscreteVariant, j0: u64, m0: u64, m_max: u64, i: u64) -> PathSample {
        simulate_discrete_tagged(spec, v, j0, m0, m_max, 11, i, &DiscreteOptions::default()).unwrap()
    }

    #[test]
    fn plain_zero_is_constant() {
        let s = ModelSpec::basic(0.4, 0.2).unwrap();
        let p = run(&s, DiscreteVariant::Plain, 0, 5, 1000, 0);
        assert_eq!(p.final_state(), 0);
        assert_eq!(p.final_z(), 0);
        assert_eq!(p.absorbed_at, Some(5.0));
    }

    #[test]
    fn start_checks() {
        let s = ModelSpec::basic(0.4, 0.2).unwrap();
        let strict = simulate_discrete_tagged(&s, DiscreteVariant::Plain, 3, 3, 10, 0, 0, &DiscreteOptions::default());
        assert!(matches!(strict, Err(SimError::InconsistentStart { .. })));
        let relaxed = DiscreteOptions { relaxed_start: true, ..Default::default() };
        assert!(simulate_discrete_tagged(&s, DiscreteVariant::Plain, 3, 3, 10, 0, 0, &relaxed).is_ok());
    }

    #[test]
    fn weighted_never_hits_zero() {
        let s = ModelSpec::basic(0.2, 0.05).unwrap();
        for i in 0..200 {
            let p = run(&s, DiscreteVariant::Weighted, 1, 2, 100_000, i);
            assert!(p.states.iter().all(|&x| x >= 1));
            assert!(p.is_consistent());
        }
    }

    #[test]
    fn states_respect_graph_size() {
        let s = ModelSpec::basic(0.5, 0.3).unwrap().with_rewiring(1.5, RewiringMode::Independent).unwrap();
        for v in [DiscreteVariant::Plain, DiscreteVariant::RewiringInhomogeneous] {
            for i in 0..100 {
                let p = run(&s, v, 1, 2, 5000, i);
                assert!(p.is_consistent());
                for (t, x) in p.times.iter().zip(&p.states) {
                    assert!((*x as f64) < *t, "{v:?}: state {x} at size {t}");
                }
            }
        }
    }

    #[test]
    fn skeleton_matches_full_path() {
        let s = ModelSpec::basic(0.5, 0.3).unwrap();
        let marks = vec![10, 100, 1000];
        let opts = DiscreteOptions { relaxed_start: false, skeleton: Some(marks.clone()) };
        for i in 0..50 {
            let full = run(&s, DiscreteVariant::Plain, 1, 2, 10_000, i);
            let sk = simulate_discrete_tagged(&s, DiscreteVariant::Plain, 1, 2, 10_000, 11, i, &opts).unwrap();
            for &c in marks.iter().chain([&10_000]) {
                assert_eq!(full.state_at(c as f64), sk.state_at(c as f64));
                assert_eq!(full.z_at(c as f64), sk.z_at(c as f64));
            }
        }
    }

    #[test]
    fn long_horizons_are_cheap() {
        let s = ModelSpec::basic(0.3, 0.0).unwrap();
        let opts = DiscreteOptions { relaxed_start: true, skeleton: Some(vec![1_000_000]) };
        let p = simulate_discrete_tagged(&s, DiscreteVariant::Plain, 1, 1, 1_000_000_000, 3, 0, &opts).unwrap();
        assert!(p.is_consistent());
    }
}
