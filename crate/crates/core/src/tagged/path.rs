use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    /// Real time t.
    Continuous,
    /// Graph size m (stored as f64, exact below 2^53).
    Steps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Complete,
    EventCapExceeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Every jump recorded.
    EventDriven,
    /// Only catastrophes and requested checkpoints recorded.
    Skeleton,
}

/// One realized trajectory of (X, Z), or of (Y, J) on the step clock.
/// Entry i holds the state and counter right after time `times[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub clock: Clock,
    pub resolution: Resolution,
    pub times: Vec<f64>,
    pub states: Vec<u128>,
    pub z_counts: Vec<u64>,
    pub absorbed_at: Option<f64>,
    pub horizon: f64,
    pub status: PathStatus,
}

impl PathSample {
    pub(crate) fn start(clock: Clock, resolution: Resolution, t0: f64, x0: u128, horizon: f64) -> Self {
        Self {
            clock,
            resolution,
            times: vec![t0],
            states: vec![x0],
            z_counts: vec![0],
            absorbed_at: None,
            horizon,
            status: PathStatus::Complete,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: u128, z: u64) {
        self.times.push(t);
        self.states.push(x);
        self.z_counts.push(z);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last record at or before t.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn state_at(&self, t: f64) -> u128 {
        self.states[self.index_at(t)]
    }

    pub fn z_at(&self, t: f64) -> u64 {
        self.z_counts[self.index_at(t)]
    }

    pub fn final_state(&self) -> u128 {
        *self.states.last().expect("nonempty path")
    }

    pub fn final_z(&self) -> u64 {
        *self.z_counts.last().expect("nonempty path")
    }

    /// log of e^{−αt}p^{−Z_t}X_t (or m^{−α}p^{−J_m}Y_m on the step clock);
    /// −∞ once the state is 0.
    pub fn log_w_at(&self, t: f64, alpha: f64, p: f64) -> f64 {
        let i = self.index_at(t);
        log_w(self.clock, t, self.states[i], self.z_counts[i], alpha, p)
    }

    pub fn w_at(&self, t: f64, alpha: f64, p: f64) -> f64 {
        self.log_w_at(t, alpha, p).exp()
    }

    /// Checks the structural invariants.
    pub fn is_consistent(&self) -> bool {
        self.times.windows(2).all(|w| w[0] < w[1])
            && self.z_counts.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
            && self.times.len() == self.states.len()
            && self.times.len() == self.z_counts.len()
    }
}

pub(crate) fn log_w(clock: Clock, t: f64, x: u128, z: u64, alpha: f64, p: f64) -> f64 {
    if x == 0 {
        return f64::NEG_INFINITY;
    }
    let growth = match clock {
        Clock::Continuous => alpha * t,
        Clock::Steps => alpha * t.ln(),
    };
    (x as f64).ln() - growth - z as f64 * p.ln()
}
