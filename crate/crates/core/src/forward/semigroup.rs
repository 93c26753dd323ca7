use super::{DistributionVector, SolverError, TruncatedGenerator};
use crate::model::{ModelSpec, RowVariant};

/// Poisson weights are cut once their geometric tail bound drops below this.
pub const DEFAULT_POISSON_TOL: f64 = 1e-25;

/// Keeps e^{−Λt} well inside the normal range of f64.
const MAX_CHUNK_RATE: f64 = 200.0;

/// p e^{Gt} for a truncated generator G by uniformization.
pub struct Uniformizer {
    gen: TruncatedGenerator,
    lambda: f64,
}

impl Uniformizer {
    pub fn new(gen: TruncatedGenerator) -> Self {
        let lambda = gen.max_exit_rate();
        Self { gen, lambda }
    }

    pub fn generator(&self) -> &TruncatedGenerator {
        &self.gen
    }

    pub fn rate(&self) -> f64 {
        self.lambda
    }

    /// Advances `v` by time `t`. The returned vector is not renormalized.
    pub fn advance(&self, v: &[f64], t: f64, tol: f64) -> Vec<f64> {
        let k = self.gen.k_max();
        assert_eq!(v.len(), k + 1);
        if t == 0.0 || self.lambda == 0.0 {
            return v.to_vec();
        }
        let chunks = (self.lambda * t / MAX_CHUNK_RATE).ceil().max(1.0) as usize;
        let dt = t / chunks as f64;
        let lt = self.lambda * dt;
        let c = 1.0 / self.lambda;
        let mut cur = v.to_vec();
        let mut term = vec![0.0; k + 1];
        let mut scratch = vec![0.0; k + 1];
        for _ in 0..chunks {
            term.copy_from_slice(&cur);
            let mut w = (-lt).exp();
            let mut acc: Vec<f64> = term.iter().map(|x| w * x).collect();
            let mut n = 0usize;
            loop {
                self.gen.apply_step(&term, c, 0, k, &mut scratch);
                std::mem::swap(&mut term, &mut scratch);
                n += 1;
                w *= lt / n as f64;
                for (a, x) in acc.iter_mut().zip(&term) {
                    *a += w * x;
                }
                let nn = (n + 1) as f64;
                if nn > lt && w * lt / nn * nn / (nn - lt) < tol {
                    break;
                }
            }
            for x in acc.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            cur = acc;
        }
        cur
    }
}

/// p0ᵀ e^{Qt} on states 0..=K. Mass that left the truncation is added to the deficit.
pub fn semigroup(
    p0: &DistributionVector,
    spec: &ModelSpec,
    variant: RowVariant,
    t: f64,
    k_max: usize,
    tol: f64,
) -> Result<DistributionVector, SolverError> {
    if !(t >= 0.0) {
        return Err(SolverError::InvalidArgument("t must be nonnegative"));
    }
    let u = Uniformizer::new(TruncatedGenerator::new(spec, variant, k_max)?);
    let start = p0.resized(k_max);
    let out = u.advance(start.mass(), t, tol);
    let lost = (start.total() - out.iter().sum::<f64>()).max(0.0);
    Ok(DistributionVector::from_parts_unchecked(out, start.deficit() + lost))
}
