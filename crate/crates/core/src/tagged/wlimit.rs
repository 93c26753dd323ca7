use serde::{Deserialize, Serialize};

use super::path::{log_w, PathSample, PathStatus, Resolution};
use super::SimError;

pub const DEFAULT_SURVIVAL_THRESHOLD: f64 = 50.0;

/// W values of one path at the requested checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WRecord {
    pub path: usize,
    pub checkpoints: Vec<f64>,
    /// ln W at each checkpoint; −∞ once absorbed.
    pub log_w: Vec<f64>,
    /// Not absorbed and final state ≥ threshold (or the event cap was hit).
    pub surviving: bool,
    pub capped: bool,
}

impl WRecord {
    pub fn w(&self) -> Vec<f64> {
        self.log_w.iter().map(|x| x.exp()).collect()
    }
}

/// W_t = e^{−αt}p^{−Z_t}X_t (or m^{−α}p^{−J_m}Y_m on the step clock) at each checkpoint.
pub fn w_limit_samples(
    paths: &[PathSample],
    checkpoints: &[f64],
    alpha: f64,
    p: f64,
    threshold: f64,
) -> Result<Vec<WRecord>, SimError> {
    paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let mut log_ws = Vec::with_capacity(checkpoints.len());
            for &t in checkpoints {
                if t > path.horizon || t < path.times[0] {
                    return Err(SimError::CheckpointBeyondHorizon(t));
                }
                let idx = path.index_at(t);
                let absorbed_before = path.absorbed_at.is_some_and(|a| a <= t);
                if path.resolution == Resolution::Skeleton && path.times[idx] != t && !absorbed_before {
                    return Err(SimError::CheckpointNotRecorded(t));
                }
                log_ws.push(log_w(path.clock, t, path.states[idx], path.z_counts[idx], alpha, p));
            }
            let capped = path.status == PathStatus::EventCapExceeded;
            let surviving = capped || (path.absorbed_at.is_none() && path.final_state() as f64 >= threshold);
            Ok(WRecord { path: i, checkpoints: checkpoints.to_vec(), log_w: log_ws, surviving, capped })
        })
        .collect()
}
