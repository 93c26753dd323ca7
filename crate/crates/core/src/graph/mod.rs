//! Full-graph simulation of the duplication–divergence process.

mod census;
mod enumerate;

pub use census::{census_to_distribution, DegreeCensus};
pub use enumerate::{duplication_law, origin_transition_law, DuplicationOutcome};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use thiserror::Error;

use crate::model::{ModelSpec, RewiringMode};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GraphError {
    #[error("graph simulation needs duplication-divergence rates with a retention sequence q_k")]
    NeedsRetention,
    #[error("checkpoint {checkpoint} lies outside [{m0}, {target}]")]
    CheckpointOutOfRange { checkpoint: usize, m0: usize, target: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("graph must have at least one vertex")]
    Empty,
}

/// Simple undirected graph with sorted adjacency arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DDGraph {
    adj: Vec<Vec<u32>>,
    step: u64,
}

/// What happened in one duplication step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub source: usize,
    pub source_degree: usize,
    pub retained: usize,
    pub extra: usize,
}

impl DDGraph {
    pub fn complete(m0: usize) -> Self {
        let adj = (0..m0)
            .map(|v| (0..m0 as u32).filter(|&u| u as usize != v).collect())
            .collect();
        Self { adj, step: 0 }
    }

    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], step: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(GraphError::InvalidEdge(a, b));
            }
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj, step: 0 })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (v, list) in self.adj.iter().enumerate() {
            for &u in list {
                if (u as usize) > v {
                    out.push((v, u as usize));
                }
            }
        }
        out
    }

    pub fn census(&self) -> DegreeCensus {
        DegreeCensus::from_degrees(self.adj.iter().map(Vec::len))
    }

    /// Adds a vertex adjacent to `neighbors` (sorted, distinct, existing vertices).
    pub fn attach(&mut self, neighbors: Vec<u32>) {
        let id = self.adj.len() as u32;
        for &u in &neighbors {
            // `id` exceeds every existing label, so the list stays sorted.
            self.adj[u as usize].push(id);
        }
        self.adj.push(neighbors);
        self.step += 1;
    }

    /// Checks simplicity and symmetry.
    pub fn is_consistent(&self) -> bool {
        let m = self.adj.len();
        self.adj.iter().enumerate().all(|(v, list)| {
            list.windows(2).all(|w| w[0] < w[1])
                && list.len() < m.max(1)
                && list.iter().all(|&u| {
                    u as usize != v && (u as usize) < m && self.adj[u as usize].binary_search(&(v as u32)).is_ok()
                })
        })
    }

    /// One duplication step under `spec`.
    pub fn duplicate_step<R: Rng + ?Sized>(
        &mut self,
        spec: &ModelSpec,
        rng: &mut R,
    ) -> Result<StepRecord, GraphError> {
        if !spec.has_retention() {
            return Err(GraphError::NeedsRetention);
        }
        let m = self.adj.len();
        if m == 0 {
            return Err(GraphError::Empty);
        }
        let source = rng.random_range(0..m);
        let k = self.adj[source].len();
        let mut nbrs: Vec<u32> = if k == 0 {
            Vec::new()
        } else if rng.random::<f64>() < spec.q_k(k) {
            self.adj[source].clone()
        } else {
            let j = spec.thinning().sample(k, rng);
            let src = &self.adj[source];
            let mut chosen: Vec<u32> = sample_indices(rng, k, j).into_iter().map(|i| src[i]).collect();
            chosen.sort_unstable();
            chosen
        };
        let retained = nbrs.len();
        let mut extra = 0;
        if let Some(rw) = spec.rewiring().filter(|rw| rw.r > 0.0) {
            let added = match rw.mode {
                RewiringMode::Independent => {
                    let pool: Vec<u32> = (0..m as u32)
                        .filter(|&u| u as usize != source && self.adj[source].binary_search(&u).is_err())
                        .collect();
                    let prob = (rw.r / m as f64).min(1.0);
                    let count = if pool.is_empty() {
                        0
                    } else {
                        Binomial::new(pool.len() as u64, prob).expect("valid binomial").sample(rng) as usize
                    };
                    sample_indices(rng, pool.len(), count).into_iter().map(|i| pool[i]).collect::<Vec<_>>()
                }
                RewiringMode::WithoutReplacement => {
                    let draw = Poisson::new(rw.r).expect("valid poisson").sample(rng) as usize;
                    let count = draw.min(m - 1);
                    sample_indices(rng, m - 1, count)
                        .into_iter()
                        .map(|i| if i >= source { i as u32 + 1 } else { i as u32 })
                        .collect()
                }
            };
            extra = added.len();
            nbrs.extend(added);
        }
        if spec.source_link() {
            nbrs.push(source as u32);
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        self.attach(nbrs);
        Ok(StepRecord { source, source_degree: k, retained, extra })
    }
}

/// Grows `initial` to `target_m` vertices, returning censuses at `checkpoints`.
pub fn run_graph(
    initial: &DDGraph,
    spec: &ModelSpec,
    target_m: usize,
    checkpoints: &[usize],
    seed: u64,
    replica: u64,
) -> Result<Vec<DegreeCensus>, GraphError> {
    let m0 = initial.vertex_count();
    if m0 == 0 {
        return Err(GraphError::Empty);
    }
    if !spec.has_retention() {
        return Err(GraphError::NeedsRetention);
    }
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    for &c in &cps {
        if c < m0 || c > target_m {
            return Err(GraphError::CheckpointOutOfRange { checkpoint: c, m0, target: target_m });
        }
    }
    let mut rng = stream_rng(seed, replica, Stream::Graph);
    let mut g = initial.clone();
    let mut out = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    loop {
        while next.peek().is_some_and(|&&c| c == g.vertex_count()) {
            out.push(g.census());
            next.next();
        }
        if g.vertex_count() >= target_m || next.peek().is_none() {
            break;
        }
        g.duplicate_step(spec, &mut rng)?;
    }
    Ok(out)
}
