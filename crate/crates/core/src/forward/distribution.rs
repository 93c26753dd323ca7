use serde::{Deserialize, Serialize};

use super::SolverError;

/// Probability vector on 0..=K plus the mass lost above K.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionVector {
    mass: Vec<f64>,
    deficit: f64,
}

impl DistributionVector {
    pub fn new(mass: Vec<f64>, deficit: f64) -> Result<Self, SolverError> {
        if mass.is_empty() {
            return Err(SolverError::InvalidDistribution("empty mass vector"));
        }
        if mass.iter().any(|&w| !(w >= 0.0)) || !(deficit >= 0.0) {
            return Err(SolverError::InvalidDistribution("negative or NaN entry"));
        }
        let total: f64 = mass.iter().sum::<f64>() + deficit;
        if (total - 1.0).abs() > 1e-10 {
            return Err(SolverError::InvalidDistribution("mass plus deficit differs from 1"));
        }
        Ok(Self { mass, deficit })
    }

    pub(crate) fn from_parts_unchecked(mass: Vec<f64>, deficit: f64) -> Self {
        Self { mass, deficit }
    }

    pub fn point_mass(k: usize, truncation: usize) -> Self {
        assert!(k <= truncation);
        let mut mass = vec![0.0; truncation + 1];
        mass[k] = 1.0;
        Self { mass, deficit: 0.0 }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn truncation(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.mass.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(k, w)| k as f64 * w).sum()
    }

    /// Same law on 0..=k (extending with zeros, or moving the cut-off mass to the deficit).
    pub fn resized(&self, k: usize) -> Self {
        let mut mass = self.mass.clone();
        let mut deficit = self.deficit;
        if k + 1 < mass.len() {
            deficit += mass[k + 1..].iter().sum::<f64>();
            mass.truncate(k + 1);
        } else {
            mass.resize(k + 1, 0.0);
        }
        Self { mass, deficit }
    }

    /// Law conditioned on {state ≥ 1}, normalized over the retained states.
    pub fn conditioned_positive(&self) -> Result<Self, SolverError> {
        let tail: f64 = self.mass[1..].iter().sum();
        if !(tail > 0.0) {
            return Err(SolverError::InvalidDistribution("no mass above zero"));
        }
        let mut mass: Vec<f64> = self.mass.iter().map(|w| w / tail).collect();
        mass[0] = 0.0;
        Ok(Self { mass, deficit: 0.0 })
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        let n = self.mass.len().max(other.mass.len());
        (0..n).map(|k| (self.get(k) - other.get(k)).abs()).fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<(), SolverError> {
        Self::new(self.mass.clone(), self.deficit).map(|_| ())
    }
}
