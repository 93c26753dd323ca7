use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::path::{Clock, PathSample, PathStatus, Resolution};
use super::{SimError, TaggedVariant};
use crate::model::{ModelError, ModelSpec};
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, Debug)]
enum Landing {
    To(u64),
    /// k + Po(r): the copy kept every edge and gained extra links.
    RetainedCopy,
}

/// One event of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub dt: f64,
    pub state: u64,
    pub catastrophe: bool,
}

/// Event-driven sampler of a continuous-time tagged process.
///
/// Clock, jump choice and landing draws use separate streams.
pub struct CtmcStepper<'a> {
    spec: &'a ModelSpec,
    variant: TaggedVariant,
    pub state: u64,
    clock: ChaCha8Rng,
    jump: ChaCha8Rng,
    thin: ChaCha8Rng,
    moves: Vec<(Landing, f64)>,
}

impl<'a> CtmcStepper<'a> {
    pub fn new(spec: &'a ModelSpec, variant: TaggedVariant, x0: u64, seed: u64, path: u64) -> Result<Self, SimError> {
        match variant {
            TaggedVariant::Weighted => {
                if !spec.is_constrained() {
                    return Err(ModelError::ConstraintViolated { k: 0, alpha_k: f64::NAN, alpha: spec.alpha() }.into());
                }
                if x0 == 0 {
                    return Err(SimError::InvalidArgument("the weighted process lives on 1, 2, ..."));
                }
            }
            TaggedVariant::Deaths if spec.deaths().is_none() => {
                return Err(ModelError::MissingVariant("deaths").into())
            }
            TaggedVariant::MultiBirth if spec.multi_births().is_none() => {
                return Err(ModelError::MissingVariant("multi_births").into())
            }
            TaggedVariant::RewiringLimit if spec.rewiring().is_none() => {
                return Err(ModelError::MissingVariant("rewiring").into())
            }
            _ => {}
        }
        Ok(Self {
            spec,
            variant,
            state: x0,
            clock: stream_rng(seed, path, Stream::Clock),
            jump: stream_rng(seed, path, Stream::Jump),
            thin: stream_rng(seed, path, Stream::Thinning),
            moves: Vec::with_capacity(8),
        })
    }

    /// Fills the non-catastrophe moves and returns the catastrophe-clock rate.
    fn rates(&mut self) -> f64 {
        self.moves.clear();
        let k = self.state;
        let ku = k as usize;
        let kf = k as f64;
        let spec = self.spec;
        if k == 0 && self.variant != TaggedVariant::RewiringLimit {
            if let Some(rate) = spec.star_rate() {
                self.moves.push((Landing::To(1), rate));
            }
            return 0.0;
        }
        match self.variant {
            TaggedVariant::Base => {
                self.moves.push((Landing::To(k + 1), kf * spec.alpha_k(ku)));
                spec.beta_k(ku)
            }
            TaggedVariant::Weighted => {
                self.moves.push((Landing::To(k + 1), spec.alpha() * (kf + 1.0)));
                spec.p_k(ku) * spec.beta_k(ku)
            }
            TaggedVariant::Deaths => {
                self.moves.push((Landing::To(k + 1), kf * spec.alpha_k(ku)));
                self.moves.push((Landing::To(k - 1), kf * spec.delta_k(ku)));
                spec.beta_k(ku)
            }
            TaggedVariant::MultiBirth => {
                let mb = spec.multi_births().expect("checked in new");
                for j in mb.support() {
                    let target = (k as i64 + j) as u64;
                    self.moves.push((Landing::To(target), kf * mb.a(ku, j)));
                }
                spec.beta_k(ku)
            }
            TaggedVariant::RewiringLimit => {
                let r = spec.rewiring().map_or(0.0, |rw| rw.r);
                self.moves.push((Landing::To(k + 1), kf * spec.alpha_k(ku.max(1)) + r));
                self.moves.push((Landing::RetainedCopy, spec.q_k(ku.max(1))));
                spec.beta_k(ku.max(1))
            }
        }
    }

    fn extra_links(&mut self) -> u64 {
        let r = self.spec.rewiring().map_or(0.0, |rw| rw.r);
        if r > 0.0 {
            Poisson::new(r).expect("valid poisson").sample(&mut self.thin) as u64
        } else {
            0
        }
    }

    fn catastrophe_landing(&mut self) -> u64 {
        let k = self.state as usize;
        match self.variant {
            TaggedVariant::Weighted => self.spec.thinning().sample_size_biased(k, &mut self.thin) as u64,
            TaggedVariant::RewiringLimit => {
                let kept = self.spec.thinning().sample(k, &mut self.thin) as u64;
                kept + self.extra_links()
            }
            _ => self.spec.thinning().sample(k, &mut self.thin) as u64,
        }
    }

    /// Total event rate out of the current state (catastrophe clock included).
    pub fn total_rate(&mut self) -> f64 {
        let cat = self.rates();
        cat + self.moves.iter().map(|m| m.1).sum::<f64>()
    }

    /// Next event, or None when the current state has no outgoing events.
    pub fn next_event(&mut self) -> Option<Event> {
        let cat = self.rates();
        let total = cat + self.moves.iter().map(|m| m.1).sum::<f64>();
        if !(total > 0.0) {
            return None;
        }
        let e: f64 = Exp1.sample(&mut self.clock);
        let dt = e / total;
        let mut u = self.jump.random::<f64>() * total;
        let mut chosen = None;
        for &(landing, rate) in &self.moves {
            if u < rate {
                chosen = Some(landing);
                break;
            }
            u -= rate;
        }
        let (state, catastrophe) = match chosen {
            Some(Landing::To(t)) => (t, false),
            Some(Landing::RetainedCopy) => (self.state + self.extra_links(), false),
            None if cat > 0.0 => (self.catastrophe_landing(), true),
            // Rounding left u past the last move.
            None => match self.moves.iter().rev().find(|m| m.1 > 0.0).map(|m| m.0) {
                Some(Landing::To(t)) => (t, false),
                _ => (self.state + self.extra_links(), false),
            },
        };
        self.state = state;
        Some(Event { dt, state, catastrophe })
    }
}

/// Exact event-driven realization on [0, t_max].
pub fn simulate_ctmc(
    spec: &ModelSpec,
    variant: TaggedVariant,
    x0: u64,
    t_max: f64,
    seed: u64,
    path: u64,
    event_cap: u64,
) -> Result<PathSample, SimError> {
    if !(t_max >= 0.0) {
        return Err(SimError::InvalidArgument("t_max must be nonnegative"));
    }
    let mut st = CtmcStepper::new(spec, variant, x0, seed, path)?;
    let mut out = PathSample::start(Clock::Continuous, Resolution::EventDriven, 0.0, x0 as u128, t_max);
    let mut t = 0.0;
    let mut z = 0u64;
    let mut events = 0u64;
    loop {
        let Some(ev) = st.next_event() else {
            if st.state == 0 {
                out.absorbed_at = Some(t);
            }
            break;
        };
        if t + ev.dt > t_max {
            break;
        }
        t += ev.dt;
        if ev.catastrophe {
            z += 1;
        }
        out.push(t, ev.state as u128, z);
        events += 1;
        if events >= event_cap {
            out.status = PathStatus::EventCapExceeded;
            out.horizon = t;
            break;
        }
    }
    Ok(out)
}

/// Time-weighted occupation law of X̃ over `run_len` steps after `burn_in` steps.
/// States above K are lumped into the last slot.
///
/// For basic specs a step at or above K jumps straight to the next catastrophe
/// (exact Yule growth in between), so one step is either a single jump below
/// K or one whole stretch above it. With a heavy stationary tail the number of
/// jumps per regeneration cycle has infinite mean, and a plain jump budget
/// would undersample the time spent low.
pub fn occupation_weighted(
    spec: &ModelSpec,
    x0: u64,
    burn_in: u64,
    run_len: u64,
    k_max: usize,
    seed: u64,
    path: u64,
) -> Result<Vec<f64>, SimError> {
    let mut st = CtmcStepper::new(spec, TaggedVariant::Weighted, x0, seed, path)?;
    let mut occ = vec![0.0; k_max + 1];
    if spec.is_basic() {
        let alpha = spec.alpha();
        let cat = spec.p() * spec.beta();
        let p = spec.p();
        let mut birth = stream_rng(seed, path, Stream::Birth);
        let wait = (cat > 0.0).then(|| rand_distr::Exp::new(cat).expect("positive rate"));
        let mut k = x0 as u128;
        for step in 0..burn_in + run_len {
            let keep = step >= burn_in;
            if let Some(exp) = wait.as_ref().filter(|_| k as usize >= k_max) {
                let w = exp.sample(&mut st.clock);
                if keep {
                    occ[k_max] += w;
                }
                let grown = super::fast::yule_growth(k + 1, alpha, w, &mut birth) - 1;
                k = 1 + super::fast::sample_binomial_big(grown - 1, p, &mut st.thin);
            } else {
                st.state = k as u64;
                let Some(ev) = st.next_event() else { break };
                if keep {
                    occ[(k as usize).min(k_max)] += ev.dt;
                }
                k = ev.state as u128;
            }
        }
    } else {
        for _ in 0..burn_in {
            st.next_event();
        }
        for _ in 0..run_len {
            let k = st.state as usize;
            let Some(ev) = st.next_event() else { break };
            occ[k.min(k_max)] += ev.dt;
        }
    }
    let total: f64 = occ.iter().sum();
    for x in occ.iter_mut() {
        *x /= total;
    }
    Ok(occ)
}
