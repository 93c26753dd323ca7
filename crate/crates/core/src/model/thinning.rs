use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::spec::sweep_points;
use super::ModelError;
use crate::special::binomial_pmf;

/// A user-supplied thinning law. Masses must be exact; nothing is interpolated.
pub trait ThinningLaw: Send + Sync + fmt::Debug {
    /// π_{kj}, 0 ≤ j ≤ k.
    fn mass(&self, k: usize, j: usize) -> f64;
    /// p_k, the mean retained fraction.
    fn mean_fraction(&self, k: usize) -> f64;
    /// σ_k², the variance of the retained count.
    fn variance(&self, k: usize) -> f64;
}

/// Bound of the form `c k^{-gamma}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub c: f64,
    pub gamma: f64,
}

impl Envelope {
    pub const ZERO: Envelope = Envelope { c: 0.0, gamma: f64::INFINITY };

    pub fn at(&self, k: usize) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c * (k as f64).powf(-self.gamma)
        }
    }

    pub(crate) fn admits(&self, k: usize, deviation: f64) -> bool {
        deviation <= self.at(k) * (1.0 + 1e-9) + 1e-14
    }
}

#[derive(Clone, Debug)]
pub enum ThinningKind {
    Binomial { p: f64 },
    /// Bi(k, p_k) with p_k = p + amplitude·k^{−exponent}.
    PerturbedBinomial { p: f64, amplitude: f64, exponent: f64 },
    Custom(Arc<dyn ThinningLaw>),
}

#[derive(Clone, Debug)]
pub struct ThinningFamily {
    kind: ThinningKind,
    limit_p: f64,
    mean_envelope: Envelope,
    variance_envelope: Envelope,
}

impl ThinningFamily {
    pub fn binomial(p: f64) -> Result<Self, ModelError> {
        check_p(p)?;
        Ok(Self {
            kind: ThinningKind::Binomial { p },
            limit_p: p,
            mean_envelope: Envelope::ZERO,
            variance_envelope: Envelope { c: p * (1.0 - p), gamma: 1.0 },
        })
    }

    pub fn perturbed_binomial(p: f64, amplitude: f64, exponent: f64) -> Result<Self, ModelError> {
        check_p(p)?;
        if !(exponent > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "thinning exponent",
                value: exponent,
                reason: "must be positive",
            });
        }
        let fam = Self {
            kind: ThinningKind::PerturbedBinomial { p, amplitude, exponent },
            limit_p: p,
            mean_envelope: Envelope { c: amplitude.abs(), gamma: exponent },
            variance_envelope: Envelope { c: 0.25, gamma: 1.0 },
        };
        for k in sweep_points(super::SWEEP_K_MAX) {
            let pk = fam.p_k(k);
            if !(pk > 0.0 && pk <= 1.0) {
                return Err(ModelError::InvalidParameter {
                    name: "p_k",
                    value: pk,
                    reason: "perturbed retention probability leaves (0, 1]",
                });
            }
        }
        Ok(fam)
    }

    /// Wraps a custom law; masses and envelopes are checked by sweep.
    pub fn custom(
        law: Arc<dyn ThinningLaw>,
        limit_p: f64,
        mean_envelope: Envelope,
        variance_envelope: Envelope,
    ) -> Result<Self, ModelError> {
        check_p(limit_p)?;
        let fam = Self {
            kind: ThinningKind::Custom(law),
            limit_p,
            mean_envelope,
            variance_envelope,
        };
        fam.check(super::SWEEP_K_MAX)?;
        Ok(fam)
    }

    /// Sweeps k ≤ k_max: row sums, π_kk < 1, and both envelopes.
    pub fn check(&self, k_max: usize) -> Result<(), ModelError> {
        for k in sweep_points(k_max) {
            let row = self.row(k);
            if row.iter().any(|&w| !(w >= 0.0)) {
                return Err(ModelError::NotStochastic { k, sum: f64::NAN });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(ModelError::NotStochastic { k, sum });
            }
            if self.limit_p < 1.0 && row[k] >= 1.0 {
                return Err(ModelError::NotStochastic { k, sum });
            }
            if !self.mean_envelope.admits(k, (self.p_k(k) - self.limit_p).abs()) {
                return Err(ModelError::EnvelopeViolated { what: "p_k", k });
            }
            let scaled = self.variance(k) / (k as f64 * k as f64);
            if !self.variance_envelope.admits(k, scaled) {
                return Err(ModelError::EnvelopeViolated { what: "sigma_k^2", k });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &ThinningKind {
        &self.kind
    }

    pub fn limit_p(&self) -> f64 {
        self.limit_p
    }

    pub fn mean_envelope(&self) -> Envelope {
        self.mean_envelope
    }

    pub fn variance_envelope(&self) -> Envelope {
        self.variance_envelope
    }

    pub fn is_binomial(&self) -> bool {
        matches!(self.kind, ThinningKind::Binomial { .. })
    }

    /// True for Bi(k, p_k) laws, perturbed or not.
    pub fn is_binomial_shape(&self) -> bool {
        !matches!(self.kind, ThinningKind::Custom(_))
    }

    pub fn p_k(&self, k: usize) -> f64 {
        match &self.kind {
            ThinningKind::Binomial { p } => *p,
            ThinningKind::PerturbedBinomial { p, amplitude, exponent } => {
                p + amplitude * (k.max(1) as f64).powf(-exponent)
            }
            ThinningKind::Custom(law) => law.mean_fraction(k),
        }
    }

    pub fn variance(&self, k: usize) -> f64 {
        match &self.kind {
            ThinningKind::Custom(law) => law.variance(k),
            _ => {
                let pk = self.p_k(k);
                k as f64 * pk * (1.0 - pk)
            }
        }
    }

    /// π_{kj} for j = 0..=k.
    pub fn row(&self, k: usize) -> Vec<f64> {
        match &self.kind {
            ThinningKind::Custom(law) => (0..=k).map(|j| law.mass(k, j)).collect(),
            _ => binomial_pmf(k, self.p_k(k)),
        }
    }

    pub fn mass(&self, k: usize, j: usize) -> f64 {
        if j > k {
            return 0.0;
        }
        match &self.kind {
            ThinningKind::Custom(law) => law.mass(k, j),
            _ => self.row(k)[j],
        }
    }

    /// Size-biased law π̃_{kj} = jπ_{kj}/(kp_k), indexed 0..=k with index 0 empty.
    pub fn size_biased(&self, k: usize) -> Result<Vec<f64>, ModelError> {
        if k == 0 {
            return Err(ModelError::DegenerateThinning(0));
        }
        let kp = k as f64 * self.p_k(k);
        if !(kp > 0.0) {
            return Err(ModelError::DegenerateThinning(k));
        }
        match &self.kind {
            ThinningKind::Custom(law) => Ok((0..=k).map(|j| j as f64 * law.mass(k, j) / kp).collect()),
            _ => {
                // Size-biasing Bi(k, p) gives 1 + Bi(k−1, p).
                let mut out = vec![0.0];
                out.extend(binomial_pmf(k - 1, self.p_k(k)));
                Ok(out)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> usize {
        if k == 0 {
            return 0;
        }
        match &self.kind {
            ThinningKind::Custom(_) => sample_row(&self.row(k), rng),
            _ => sample_binomial(k as u64, self.p_k(k), rng) as usize,
        }
    }

    pub fn sample_size_biased<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> usize {
        match &self.kind {
            ThinningKind::Custom(_) => match self.size_biased(k) {
                Ok(row) => sample_row(&row, rng),
                Err(_) => k,
            },
            _ => 1 + sample_binomial(k as u64 - 1, self.p_k(k), rng) as usize,
        }
    }
}

fn check_p(p: f64) -> Result<(), ModelError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name: "p",
            value: p,
            reason: "must lie in (0, 1]",
        })
    }
}

pub(crate) fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Inversion sampling from a probability row.
pub(crate) fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &w) in row.iter().enumerate() {
        if w > 0.0 {
            last = j;
            acc += w;
            if u < acc {
                return j;
            }
        }
    }
    last
}
