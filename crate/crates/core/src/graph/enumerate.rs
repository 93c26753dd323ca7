//! Exact law of one duplication step for the basic model.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::DDGraph;

/// One outcome of a duplication step: the copied vertex and the copy's neighbors.
#[derive(Clone, Debug, PartialEq)]
pub struct DuplicationOutcome {
    pub source: usize,
    pub neighbors: Vec<u32>,
    pub prob: BigRational,
}

fn pow(x: &BigRational, n: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= x;
    }
    out
}

/// Enumerates all outcomes of a duplication step under Bi(k, p) thinning
/// with retention q (no rewiring). Probabilities are exact.
pub fn duplication_law(g: &DDGraph, p: &BigRational, q: &BigRational) -> Vec<DuplicationOutcome> {
    let m = g.vertex_count();
    let inv_m = BigRational::new(BigInt::one(), BigInt::from(m));
    let one = BigRational::one();
    let mut out = Vec::new();
    for source in 0..m {
        let nbrs = g.neighbors(source);
        let k = nbrs.len();
        if k == 0 {
            out.push(DuplicationOutcome { source, neighbors: Vec::new(), prob: inv_m.clone() });
            continue;
        }
        out.push(DuplicationOutcome { source, neighbors: nbrs.to_vec(), prob: &inv_m * q });
        // A fixed j-subset has probability C(k,j)p^j(1−p)^{k−j} / C(k,j).
        for mask in 0u64..(1u64 << k) {
            let subset: Vec<u32> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| nbrs[i]).collect();
            let j = subset.len();
            let w = &inv_m * (&one - q) * pow(p, j) * pow(&(&one - p), k - j);
            if !w.is_zero() {
                out.push(DuplicationOutcome { source, neighbors: subset, prob: w });
            }
        }
    }
    out
}

/// Exact one-step law of the degree of a uniform vertex of the grown graph,
/// grouped by the degree of its origin (itself if old, the source if new).
/// Row k is normalized by the origin-class probability N_{m,k}/m.
pub fn origin_transition_law(
    g: &DDGraph,
    outcomes: &[DuplicationOutcome],
) -> BTreeMap<usize, BTreeMap<usize, BigRational>> {
    let m = g.vertex_count();
    let inv_new = BigRational::new(BigInt::one(), BigInt::from(m + 1));
    let mut joint: BTreeMap<usize, BTreeMap<usize, BigRational>> = BTreeMap::new();
    for o in outcomes {
        let mut add = |from: usize, to: usize, w: BigRational| {
            *joint.entry(from).or_default().entry(to).or_insert_with(BigRational::zero) += w;
        };
        let base = &o.prob * &inv_new;
        for v in 0..m {
            let k = g.degree(v);
            let gained = o.neighbors.binary_search(&(v as u32)).is_ok();
            add(k, k + usize::from(gained), base.clone());
        }
        add(g.degree(o.source), o.neighbors.len(), base);
    }
    let census = g.census();
    for (k, row) in joint.iter_mut() {
        let class = BigRational::new(BigInt::from(census.count(*k)), BigInt::from(m));
        for w in row.values_mut() {
            *w = &*w / &class;
        }
    }
    joint
}
