use super::{DistributionVector, SolverError, TruncatedGenerator};
use crate::model::{ModelSpec, RowVariant};

const NEGATIVE_TOL: f64 = 1e-12;

fn clamp_checked(v: &mut [f64], step: usize) -> Result<(), SolverError> {
    for (k, w) in v.iter_mut().enumerate() {
        if *w < 0.0 {
            if *w < -NEGATIVE_TOL {
                return Err(SolverError::NegativeMass { step, k, value: *w });
            }
            *w = 0.0;
        }
    }
    Ok(())
}

/// 𝔭_m = 𝔭_{m0} Π_{j=m0+1}^{m} (I + j^{−1}[Q]_j), truncated at K.
pub fn discrete_recursion(
    p_m0: &DistributionVector,
    spec: &ModelSpec,
    m0: usize,
    m: usize,
    k_max: usize,
) -> Result<DistributionVector, SolverError> {
    if m < m0 {
        return Err(SolverError::InvalidArgument("m must be at least m0"));
    }
    if m == m0 {
        return Ok(p_m0.clone());
    }
    let gen = TruncatedGenerator::new(spec, RowVariant::Base, k_max)?;
    let start = p_m0.resized(k_max);
    let mut v = start.mass().to_vec();
    let mut deficit = start.deficit();
    let mut next = vec![0.0; k_max + 1];
    for j in m0 + 1..=m {
        deficit += gen.apply_step(&v, 1.0 / j as f64, 0, j - 1, &mut next);
        clamp_checked(&mut next, j)?;
        std::mem::swap(&mut v, &mut next);
    }
    Ok(DistributionVector::from_parts_unchecked(v, deficit))
}

/// Law ṽ_m of the weighted chain Ỹ and the prefactor Π_{s=m0}^{m−1}(1 + (2α−1)/(s+1)).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRecursion {
    pub v: DistributionVector,
    pub prefactor: f64,
    pub j0: usize,
}

/// ṽ_{s+1} = ṽ_s (I + (s+2α)^{−1}[Q̃]_{s+1}) from ṽ_{m0} = δ_{j0}.
pub fn weighted_discrete_recursion(
    j0: usize,
    spec: &ModelSpec,
    m0: usize,
    m: usize,
    k_max: usize,
) -> Result<WeightedRecursion, SolverError> {
    if m < m0 {
        return Err(SolverError::InvalidArgument("m must be at least m0"));
    }
    if j0 == 0 || j0 > k_max {
        return Err(SolverError::InvalidArgument("j0 must lie in 1..=K"));
    }
    let alpha = spec.alpha();
    let gen = TruncatedGenerator::new(spec, RowVariant::Weighted, k_max)?;
    let mut v = DistributionVector::point_mass(j0, k_max).mass().to_vec();
    let mut next = vec![0.0; k_max + 1];
    let mut deficit = 0.0;
    let mut prefactor = 1.0;
    for s in m0..m {
        deficit += gen.apply_step(&v, 1.0 / (s as f64 + 2.0 * alpha), 1, s, &mut next);
        clamp_checked(&mut next, s + 1)?;
        std::mem::swap(&mut v, &mut next);
        prefactor *= 1.0 + (2.0 * alpha - 1.0) / (s + 1) as f64;
    }
    Ok(WeightedRecursion { v: DistributionVector::from_parts_unchecked(v, deficit), prefactor, j0 })
}

/// 𝔭_{m,k} = j0·k^{−1}·prefactor·ṽ_{m,k} for k ≥ 1 (entry 0 is left at 0).
pub fn recover_unweighted(w: &WeightedRecursion) -> Vec<f64> {
    w.v.mass()
        .iter()
        .enumerate()
        .map(|(k, &x)| if k == 0 { 0.0 } else { w.j0 as f64 * w.prefactor * x / k as f64 })
        .collect()
}
