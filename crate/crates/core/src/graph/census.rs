use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::forward::{DistributionVector, SolverError};

/// Counts N_{m,k} of vertices by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCensus {
    pub m: usize,
    pub counts: BTreeMap<usize, u64>,
}

impl DegreeCensus {
    pub fn from_degrees(degrees: impl Iterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        let mut m = 0;
        for d in degrees {
            *counts.entry(d).or_insert(0) += 1;
            m += 1;
        }
        Self { m, counts }
    }

    pub fn total_degree(&self) -> u64 {
        self.counts.iter().map(|(&k, &n)| k as u64 * n).sum()
    }

    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

/// 𝔭_{m,k} = N_{m,k}/m on 0..=max(K, max degree).
pub fn census_to_distribution(c: &DegreeCensus, k_max: Option<usize>) -> Result<DistributionVector, SolverError> {
    if c.m == 0 {
        return Err(SolverError::EmptyCensus);
    }
    let k = k_max.unwrap_or(0).max(c.max_degree());
    let mut mass = vec![0.0; k + 1];
    for (&d, &n) in &c.counts {
        mass[d] = n as f64 / c.m as f64;
    }
    DistributionVector::new(mass, 0.0)
}
