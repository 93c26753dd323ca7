use rayon::prelude::*;

use super::SolverError;
use crate::model::{q_row, ModelSpec, RowVariant};

/// Rows 0..=K of a generator. Transitions above K are dropped and the
/// original diagonal is kept, so mass leaks out at the top.
#[derive(Clone, Debug)]
pub struct TruncatedGenerator {
    k_max: usize,
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    leak: Vec<f64>,
}

impl TruncatedGenerator {
    pub fn new(spec: &ModelSpec, variant: RowVariant, k_max: usize) -> Result<Self, SolverError> {
        if variant == RowVariant::Bivariate {
            return Err(SolverError::InvalidArgument("bivariate rows live on pairs (k, z)"));
        }
        // (kept entries, diagonal, leak) per row.
        type Built = Result<(Vec<(usize, f64)>, f64, f64), SolverError>;
        let built: Vec<Built> = (0..=k_max)
            .into_par_iter()
            .map(|k| {
                if variant == RowVariant::Weighted && k == 0 {
                    return Ok((Vec::new(), 0.0, 0.0));
                }
                if let RowVariant::RewiringAt(m) = variant {
                    if k + 1 > m {
                        return Ok((Vec::new(), 0.0, 0.0));
                    }
                }
                let row = q_row(spec, variant, k)?;
                let mut kept = Vec::with_capacity(row.entries.len());
                let mut leak = 0.0;
                for e in &row.entries {
                    if e.target <= k_max {
                        kept.push((e.target, e.rate));
                    } else {
                        leak += e.rate;
                    }
                }
                Ok((kept, row.diagonal, leak))
            })
            .collect();
        let mut rows = Vec::with_capacity(k_max + 1);
        let mut diag = Vec::with_capacity(k_max + 1);
        let mut leak = Vec::with_capacity(k_max + 1);
        for b in built {
            let (r, d, l) = b?;
            rows.push(r);
            diag.push(d);
            leak.push(l);
        }
        Ok(Self { k_max, rows, diag, leak })
    }

    /// Folds the upward leak back into the diagonal, so transitions above K
    /// are blocked instead of lost. Rows then sum to zero.
    pub fn reflecting(mut self) -> Self {
        for (d, l) in self.diag.iter_mut().zip(self.leak.iter_mut()) {
            *d += *l;
            *l = 0.0;
        }
        self
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn row(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    pub fn diagonal(&self, k: usize) -> f64 {
        self.diag[k]
    }

    /// Rate of transitions from k to states above K.
    pub fn leak(&self, k: usize) -> f64 {
        self.leak[k]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |a, &d| a.max(-d))
    }

    /// out = v·(I + c·G) over rows `lo..=hi`; rows outside that range act as identity.
    /// Returns the mass sent above K.
    pub(crate) fn apply_step(&self, v: &[f64], c: f64, lo: usize, hi: usize, out: &mut [f64]) -> f64 {
        out.copy_from_slice(v);
        let mut lost = 0.0;
        for k in lo..=hi.min(self.k_max) {
            let w = v[k];
            if w == 0.0 {
                continue;
            }
            let cw = c * w;
            out[k] += cw * self.diag[k];
            for &(j, r) in &self.rows[k] {
                out[j] += cw * r;
            }
            lost += cw * self.leak[k];
        }
        lost
    }
}
