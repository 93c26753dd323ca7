use serde::{Deserialize, Serialize};

use super::{DistributionVector, SolverError, TruncatedGenerator, Uniformizer, DEFAULT_POISSON_TOL};
use crate::model::{ModelError, ModelSpec, RowVariant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiCheck {
    pub max_rel_error: f64,
    /// (t, max relative error at t)
    pub per_time: Vec<(f64, f64)>,
    pub deficit_x: f64,
    pub deficit_tilde: f64,
    pub reliable: bool,
}

/// Compares jP_i[X_t = j] with e^{−(1−2α)t}·i·P_i[X̃_t = j] for j = 1..=K.
/// Entries where both sides fall below `floor` are skipped.
pub fn quasi_stationarity_check(
    spec: &ModelSpec,
    i: usize,
    t_grid: &[f64],
    k_max: usize,
    tol: f64,
    floor: f64,
) -> Result<QuasiCheck, SolverError> {
    if !spec.is_constrained() {
        return Err(ModelError::ConstraintViolated { k: 0, alpha_k: f64::NAN, alpha: spec.alpha() }.into());
    }
    if i == 0 || i > k_max {
        return Err(SolverError::InvalidArgument("i must lie in 1..=K"));
    }
    let mut ts = t_grid.to_vec();
    if ts.iter().any(|t| !(*t >= 0.0)) {
        return Err(SolverError::InvalidArgument("times must be nonnegative"));
    }
    ts.sort_by(f64::total_cmp);
    let alpha = spec.alpha();
    let ux = Uniformizer::new(TruncatedGenerator::new(spec, RowVariant::Base, k_max)?);
    let uw = Uniformizer::new(TruncatedGenerator::new(spec, RowVariant::Weighted, k_max)?);
    let mut x = DistributionVector::point_mass(i, k_max).mass().to_vec();
    let mut w = x.clone();
    let mut now = 0.0;
    let mut per_time = Vec::with_capacity(ts.len());
    let mut worst = 0.0f64;
    for &t in &ts {
        x = ux.advance(&x, t - now, DEFAULT_POISSON_TOL);
        w = uw.advance(&w, t - now, DEFAULT_POISSON_TOL);
        now = t;
        let scale = (-(1.0 - 2.0 * alpha) * t).exp() * i as f64;
        let mut err = 0.0f64;
        for j in 1..=k_max {
            let lhs = j as f64 * x[j];
            let rhs = scale * w[j];
            let big = lhs.abs().max(rhs.abs());
            if big >= floor {
                err = err.max((lhs - rhs).abs() / big);
            }
        }
        worst = worst.max(err);
        per_time.push((t, err));
    }
    let deficit_x = (1.0 - x.iter().sum::<f64>()).max(0.0);
    let deficit_tilde = (1.0 - w.iter().sum::<f64>()).max(0.0);
    Ok(QuasiCheck {
        max_rel_error: worst,
        per_time,
        deficit_x,
        deficit_tilde,
        reliable: deficit_x <= tol && deficit_tilde <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_time_zero() {
        let s = ModelSpec::basic(0.3, 0.0).unwrap();
        let r = quasi_stationarity_check(&s, 3, &[0.0], 50, 1e-6, 1e-12).unwrap();
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn identity_small_example() {
        let s = ModelSpec::basic(0.3, 0.0).unwrap();
        let r = quasi_stationarity_check(&s, 3, &[0.5, 1.0, 3.0], 120, 1e-3, 1e-12).unwrap();
        assert!(r.max_rel_error < 1e-9, "{r:?}");
    }
}
