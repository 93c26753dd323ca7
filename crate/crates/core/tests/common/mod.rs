#![allow(dead_code)]

use std::collections::BTreeMap;

use dupdiv::graph::{duplication_law, origin_transition_law};
use dupdiv::DDGraph;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn binom(n: usize, k: usize) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

fn pow(x: &BigRational, n: usize) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, _| acc * x)
}

/// Row k of I + (m+1)^{-1} Q for the basic model, in exact arithmetic.
/// Births at rate αk, catastrophes at rate 1 landing on q δ_k + (1−q) Bi(k, p).
pub fn one_step_row(k: usize, m: usize, p: &BigRational, q: &BigRational) -> BTreeMap<usize, BigRational> {
    let one = BigRational::one();
    let alpha = q + (&one - q) * p;
    let h = ratio(1, m as i64 + 1);
    let mut row = BTreeMap::new();
    let kf = BigRational::from_integer(BigInt::from(k));
    row.insert(k, &one - &h * (&alpha * &kf + &one));
    if k > 0 {
        row.insert(k + 1, &h * &alpha * &kf);
    }
    for j in 0..=k {
        let mut land = (&one - q) * BigRational::from_integer(binom(k, j)) * pow(p, j) * pow(&(&one - p), k - j);
        if j == k {
            land += q;
        }
        *row.entry(j).or_insert_with(BigRational::zero) += &h * land;
    }
    row.retain(|_, w| !w.is_zero());
    row
}

/// Largest discrepancy between the enumerated law and the one-step rows;
/// zero means exact agreement.
pub fn brute_force_mismatch(g: &DDGraph, p: &BigRational, q: &BigRational) -> Option<(usize, usize)> {
    let law = duplication_law(g, p, q);
    let m = g.vertex_count();
    for (k, row) in origin_transition_law(g, &law) {
        let mut expected = one_step_row(k, m, p, q);
        let mut got = row.clone();
        got.retain(|_, w| !w.is_zero());
        expected.retain(|_, w| !w.is_zero());
        if got != expected {
            let j = got.keys().chain(expected.keys()).find(|j| got.get(j) != expected.get(j)).copied();
            return Some((k, j.unwrap_or(k)));
        }
    }
    None
}

/// Small graphs used for exhaustive checks: named shapes plus seeded random graphs.
pub fn graph_corpus() -> Vec<(String, DDGraph)> {
    let mut out = vec![
        ("K1".to_string(), DDGraph::empty(1)),
        ("K2".to_string(), DDGraph::complete(2)),
        ("K2+K1".to_string(), DDGraph::from_edges(3, &[(0, 1)]).unwrap()),
        ("P3".to_string(), DDGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()),
        ("K3".to_string(), DDGraph::complete(3)),
        ("star4".to_string(), DDGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap()),
        ("C4".to_string(), DDGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()),
        ("paw".to_string(), DDGraph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap()),
        ("K5".to_string(), DDGraph::complete(5)),
        ("C6".to_string(), DDGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap()),
        ("K8".to_string(), DDGraph::complete(8)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x67_7261_7068);
    for m in 6..=8 {
        for i in 0..3 {
            let mut edges = Vec::new();
            for a in 0..m {
                for b in a + 1..m {
                    if rng.random::<f64>() < 0.45 {
                        edges.push((a, b));
                    }
                }
            }
            out.push((format!("random{m}_{i}"), DDGraph::from_edges(m, &edges).unwrap()));
        }
    }
    out
}
