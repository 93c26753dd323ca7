use serde::{Deserialize, Serialize};

use super::{DistributionVector, SolverError};
use crate::model::{classify, q_row, ModelSpec, Process, RowVariant, Verdict};

/// Stationary law of X̃ and the conditional limit of X given X ≥ 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLimit {
    pub conditional: DistributionVector,
    pub stationary: DistributionVector,
    /// π_K·α(K+1): probability flux the reflected truncation suppresses.
    pub leak_rate: f64,
    /// Conditional mass on states above K/2; the truncation diagnostic.
    pub boundary_mass: f64,
}

/// Stationary vector of X̃ on the reflected truncation {1..=K}.
///
/// Uses cut balance: π_n Q̃_{n,n+1} = Σ_{i>n} π_i Σ_{j≤n} Q̃_{ij}, solved
/// from the top down. Every term is nonnegative.
pub fn stationary_weighted(spec: &ModelSpec, k_max: usize) -> Result<(Vec<f64>, f64), SolverError> {
    if k_max < 2 {
        return Err(SolverError::InvalidArgument("truncation must be at least 2"));
    }
    // down[i][n-1] = Σ_{j ≤ n} Q̃_{ij} for n < i
    let mut down: Vec<Vec<f64>> = vec![Vec::new(); k_max + 1];
    let mut up = vec![0.0; k_max + 1];
    for i in 1..=k_max {
        let row = q_row(spec, RowVariant::Weighted, i)?;
        let mut dense = vec![0.0; i];
        for e in &row.entries {
            if e.target == i + 1 {
                up[i] = e.rate;
            } else if e.target < i {
                dense[e.target] += e.rate;
            }
        }
        let mut acc = 0.0;
        down[i] = (1..i)
            .map(|j| {
                acc += dense[j];
                acc
            })
            .collect();
    }
    let mut pi = vec![0.0; k_max + 1];
    pi[k_max] = 1.0;
    for n in (1..k_max).rev() {
        let flux: f64 = (n + 1..=k_max).map(|i| pi[i] * down[i][n - 1]).sum();
        pi[n] = flux / up[n];
        if pi[n] > 1e250 {
            for x in pi[n..].iter_mut() {
                *x *= 1e-250;
            }
        }
    }
    let total: f64 = pi.iter().sum();
    for x in pi.iter_mut() {
        *x /= total;
    }
    let leak = pi[k_max] * up_rate(spec, k_max);
    Ok((pi, leak))
}

fn up_rate(spec: &ModelSpec, k: usize) -> f64 {
    spec.alpha() * (k + 1) as f64
}

/// Limit of P[X_t = j | X_t ≥ 1]: j^{−1}π̃_j / Σ_l l^{−1}π̃_l.
pub fn conditional_limit(spec: &ModelSpec, k_max: usize, tol: f64) -> Result<ConditionalLimit, SolverError> {
    let report = classify(spec, Process::XTilde);
    if report.verdict != Verdict::GeometricallyErgodic {
        return Err(SolverError::NotErgodic(report.margin));
    }
    let (pi, leak_rate) = stationary_weighted(spec, k_max)?;
    let mut c: Vec<f64> = pi.iter().enumerate().map(|(j, &x)| if j == 0 { 0.0 } else { x / j as f64 }).collect();
    let s: f64 = c.iter().sum();
    for x in c.iter_mut() {
        *x /= s;
    }
    let boundary_mass: f64 = c[k_max / 2 + 1..].iter().sum();
    if boundary_mass > tol {
        return Err(SolverError::DeficitExceeded { deficit: boundary_mass, bound: tol });
    }
    Ok(ConditionalLimit {
        conditional: DistributionVector::from_parts_unchecked(c, 0.0),
        stationary: DistributionVector::from_parts_unchecked(pi, 0.0),
        leak_rate,
        boundary_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::TruncatedGenerator;

    #[test]
    fn balance_equations_hold() {
        let s = ModelSpec::basic(0.3, 0.0).unwrap();
        let k = 80;
        let (pi, _) = stationary_weighted(&s, k).unwrap();
        let g = TruncatedGenerator::new(&s, RowVariant::Weighted, k).unwrap();
        // πG = 0 on the reflected chain: the diagonal of row K loses its up-rate.
        let mut res = vec![0.0; k + 1];
        for i in 1..=k {
            let d = if i == k { g.diagonal(i) + g.leak(i) } else { g.diagonal(i) };
            res[i] += pi[i] * d;
            for &(j, r) in g.row(i) {
                res[j] += pi[i] * r;
            }
        }
        for (j, r) in res.iter().enumerate().skip(1) {
            assert!(r.abs() < 1e-13, "j={j} residual={r}");
        }
    }

    #[test]
    fn normalized_and_rejects_transient() {
        let s = ModelSpec::basic(0.2, 0.0).unwrap();
        let c = conditional_limit(&s, 600, 1e-3).unwrap();
        assert!(c.boundary_mass < 1e-3);
        assert!((c.conditional.total() - 1.0).abs() < 1e-14);
        assert_eq!(c.stationary.get(0), 0.0);
        let t = ModelSpec::basic(0.8, 0.2).unwrap();
        assert!(matches!(conditional_limit(&t, 100, 0.1), Err(SolverError::NotErgodic(_))));
    }
}
