use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::thinning::{Envelope, ThinningFamily};
use super::ModelError;

/// Largest k probed when checking perturbation envelopes.
pub const SWEEP_K_MAX: usize = 10_000;
pub const DEFAULT_J_MAX: i64 = 16;

/// Every k up to 1000, then roughly 1% geometric steps up to `k_max`.
pub fn sweep_points(k_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=k_max.min(1000)).collect();
    let mut k = 1000usize;
    while k < k_max {
        k = ((k as f64 * 1.01).ceil() as usize).min(k_max);
        out.push(k);
    }
    out
}

#[derive(Clone)]
enum SeqKind {
    Constant,
    Power { amplitude: f64, exponent: f64 },
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

/// A rate sequence x_k converging to `limit` within a declared envelope.
#[derive(Clone)]
pub struct Sequence {
    limit: f64,
    kind: SeqKind,
    envelope: Envelope,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            SeqKind::Constant => "constant".to_string(),
            SeqKind::Power { amplitude, exponent } => format!("power({amplitude}, {exponent})"),
            SeqKind::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("Sequence")
            .field("limit", &self.limit)
            .field("kind", &kind)
            .field("envelope", &self.envelope)
            .finish()
    }
}

impl Sequence {
    pub fn constant(value: f64) -> Self {
        Self { limit: value, kind: SeqKind::Constant, envelope: Envelope::ZERO }
    }

    /// x_k = limit + amplitude·k^{−exponent}.
    pub fn power(limit: f64, amplitude: f64, exponent: f64) -> Self {
        if amplitude == 0.0 {
            return Self::constant(limit);
        }
        Self {
            limit,
            kind: SeqKind::Power { amplitude, exponent },
            envelope: Envelope { c: amplitude.abs(), gamma: exponent },
        }
    }

    /// Arbitrary callback; the envelope is checked when the spec is built.
    pub fn custom(
        limit: f64,
        envelope: Envelope,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { limit, kind: SeqKind::Custom(Arc::new(f)), envelope }
    }

    pub fn at(&self, k: usize) -> f64 {
        match &self.kind {
            SeqKind::Constant => self.limit,
            SeqKind::Power { amplitude, exponent } => {
                self.limit + amplitude * (k.max(1) as f64).powf(-exponent)
            }
            SeqKind::Custom(f) => f(k),
        }
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, SeqKind::Constant)
    }

    fn check(&self, what: &'static str, lo: f64, hi: f64, hi_open: bool) -> Result<(), ModelError> {
        let in_range = |x: f64| x >= lo && (if hi_open { x < hi } else { x <= hi });
        if !in_range(self.limit) {
            return Err(ModelError::InvalidParameter {
                name: what,
                value: self.limit,
                reason: "limit out of range",
            });
        }
        if self.is_constant() {
            return Ok(());
        }
        for k in sweep_points(SWEEP_K_MAX) {
            let x = self.at(k);
            if !in_range(x) {
                return Err(ModelError::InvalidParameter { name: what, value: x, reason: "term out of range" });
            }
            if !self.envelope.admits(k, (x - self.limit).abs()) {
                return Err(ModelError::EnvelopeViolated { what, k });
            }
        }
        Ok(())
    }
}

/// How birth and catastrophe rates are specified.
#[derive(Clone, Debug)]
pub enum Rates {
    /// α_k = q_k + p_k(1−q_k), β_k = 1 − q_k.
    DuplicationDivergence { q: Sequence },
    /// q_k chosen so that α_k equals `alpha` for every k.
    Constrained { alpha: f64 },
    /// Free α_k, β_k (no graph interpretation).
    General { alpha: Sequence, beta: Sequence },
}

/// Finite-support multi-birth family a_{k,j} = limit_j + amplitude_j·k^{−exponent}.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiBirth {
    pub limits: BTreeMap<i64, f64>,
    pub amplitudes: BTreeMap<i64, f64>,
    pub exponent: f64,
    pub j_max: i64,
}

impl MultiBirth {
    pub fn new(limits: BTreeMap<i64, f64>) -> Self {
        Self { limits, amplitudes: BTreeMap::new(), exponent: 1.0, j_max: DEFAULT_J_MAX }
    }

    pub fn a(&self, k: usize, j: i64) -> f64 {
        let base = self.limits.get(&j).copied().unwrap_or(0.0);
        let amp = self.amplitudes.get(&j).copied().unwrap_or(0.0);
        if amp == 0.0 {
            base
        } else {
            base + amp * (k.max(1) as f64).powf(-self.exponent)
        }
    }

    pub fn support(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.limits.keys().chain(self.amplitudes.keys()).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// α^(b) = Σ_j j a_{*,j}.
    pub fn alpha_b(&self) -> f64 {
        self.limits.iter().map(|(&j, &a)| j as f64 * a).sum()
    }

    fn validate(&self) -> Result<(), ModelError> {
        for &j in &self.support() {
            if j == 0 || j < -1 || j > self.j_max {
                return Err(ModelError::InvalidParameter {
                    name: "multi_births.j",
                    value: j as f64,
                    reason: "support must lie in {-1} and 1..=j_max",
                });
            }
        }
        if !(self.exponent > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "multi_births.exponent",
                value: self.exponent,
                reason: "must be positive",
            });
        }
        let support = self.support();
        let mut inf_total = f64::INFINITY;
        let mut sup_second = 0.0f64;
        for k in sweep_points(SWEEP_K_MAX) {
            let mut total = 0.0;
            let mut second = 0.0;
            for &j in &support {
                let a = self.a(k, j);
                if !(a >= 0.0) {
                    return Err(ModelError::InvalidParameter {
                        name: "multi_births.a",
                        value: a,
                        reason: "rates must be nonnegative",
                    });
                }
                total += a;
                second += (j * j) as f64 * a;
            }
            inf_total = inf_total.min(total);
            sup_second = sup_second.max(second);
        }
        if !(inf_total > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "multi_births.total",
                value: inf_total,
                reason: "inf_k sum_j a_kj must be positive",
            });
        }
        if !sup_second.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "multi_births.second_moment",
                value: sup_second,
                reason: "must stay bounded",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewiringMode {
    /// Each eligible vertex links to the copy independently with probability r/m.
    Independent,
    /// min(Po(r), m−1) extra vertices drawn without replacement, duplicates merged.
    WithoutReplacement,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rewiring {
    pub r: f64,
    pub mode: RewiringMode,
}

/// Full parameterization of a model variant. Immutable once built.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    thinning: ThinningFamily,
    rates: Rates,
    deaths: Option<Sequence>,
    multi_births: Option<MultiBirth>,
    rewiring: Option<Rewiring>,
    star_rate: Option<f64>,
    source_link: bool,
    constrained: bool,
}

impl ModelSpec {
    pub fn new(thinning: ThinningFamily, rates: Rates) -> Result<Self, ModelError> {
        let mut spec = Self {
            thinning,
            rates,
            deaths: None,
            multi_births: None,
            rewiring: None,
            star_rate: None,
            source_link: false,
            constrained: false,
        };
        spec.validate_rates()?;
        spec.constrained = spec.detect_constrained();
        Ok(spec)
    }

    /// Binomial thinning Bi(k, p) and constant retention q.
    pub fn basic(p: f64, q: f64) -> Result<Self, ModelError> {
        Self::new(
            ThinningFamily::binomial(p)?,
            Rates::DuplicationDivergence { q: Sequence::constant(q) },
        )
    }

    /// Retention chosen so that α_k = alpha for all k.
    pub fn constrained(thinning: ThinningFamily, alpha: f64) -> Result<Self, ModelError> {
        Self::new(thinning, Rates::Constrained { alpha })
    }

    pub fn with_deaths(mut self, delta: Sequence) -> Result<Self, ModelError> {
        delta.check("delta", 0.0, f64::INFINITY, true)?;
        self.deaths = Some(delta);
        Ok(self)
    }

    pub fn with_multi_births(mut self, mb: MultiBirth) -> Result<Self, ModelError> {
        mb.validate()?;
        self.multi_births = Some(mb);
        Ok(self)
    }

    pub fn with_rewiring(mut self, r: f64, mode: RewiringMode) -> Result<Self, ModelError> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "r", value: r, reason: "must be finite and >= 0" });
        }
        if matches!(self.rates, Rates::General { .. }) {
            return Err(ModelError::NeedsRetention);
        }
        self.rewiring = Some(Rewiring { r, mode });
        Ok(self)
    }

    /// Lets state 0 jump to 1 at the given rate.
    pub fn with_star_rate(mut self, rate: f64) -> Result<Self, ModelError> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "star_rate", value: rate, reason: "must be finite and >= 0" });
        }
        self.star_rate = Some(rate);
        Ok(self)
    }

    pub fn with_source_link(mut self, on: bool) -> Self {
        self.source_link = on;
        self
    }

    fn validate_rates(&self) -> Result<(), ModelError> {
        match &self.rates {
            Rates::DuplicationDivergence { q } => q.check("q", 0.0, 1.0, true),
            Rates::Constrained { alpha } => {
                let p = self.thinning.limit_p();
                if !(*alpha >= p && *alpha <= 1.0) {
                    return Err(ModelError::InvalidParameter {
                        name: "alpha",
                        value: *alpha,
                        reason: "constrained family needs p <= alpha <= 1",
                    });
                }
                if *alpha == 1.0 && p < 1.0 {
                    return Err(ModelError::InvalidParameter {
                        name: "alpha",
                        value: *alpha,
                        reason: "alpha = 1 forces q = 1",
                    });
                }
                for k in sweep_points(SWEEP_K_MAX) {
                    let qk = self.q_k(k);
                    if !(0.0..1.0).contains(&qk) {
                        return Err(ModelError::InvalidParameter {
                            name: "q_k",
                            value: qk,
                            reason: "constraint forces q_k outside [0, 1)",
                        });
                    }
                }
                Ok(())
            }
            Rates::General { alpha, beta } => {
                alpha.check("alpha", 0.0, f64::INFINITY, true)?;
                beta.check("beta", 0.0, f64::INFINITY, true)
            }
        }
    }

    fn detect_constrained(&self) -> bool {
        match &self.rates {
            Rates::Constrained { .. } => true,
            Rates::DuplicationDivergence { q } => {
                if q.is_constant() && self.thinning.mean_envelope() == Envelope::ZERO {
                    return true;
                }
                let a = self.alpha();
                sweep_points(SWEEP_K_MAX)
                    .into_iter()
                    .all(|k| (self.alpha_k(k) - a).abs() <= 1e-12)
            }
            Rates::General { .. } => false,
        }
    }

    pub fn thinning(&self) -> &ThinningFamily {
        &self.thinning
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    pub fn deaths(&self) -> Option<&Sequence> {
        self.deaths.as_ref()
    }

    pub fn multi_births(&self) -> Option<&MultiBirth> {
        self.multi_births.as_ref()
    }

    pub fn rewiring(&self) -> Option<Rewiring> {
        self.rewiring
    }

    pub fn star_rate(&self) -> Option<f64> {
        self.star_rate.filter(|&r| r > 0.0)
    }

    pub fn source_link(&self) -> bool {
        self.source_link
    }

    /// α_k = α for every k (needed by the weighted process).
    pub fn is_constrained(&self) -> bool {
        self.constrained
    }

    pub fn has_retention(&self) -> bool {
        !matches!(self.rates, Rates::General { .. })
    }

    /// Binomial thinning, constant q, no variant modifications.
    pub fn is_basic(&self) -> bool {
        let rates_ok = match &self.rates {
            Rates::DuplicationDivergence { q } => q.is_constant(),
            Rates::Constrained { .. } => true,
            Rates::General { .. } => false,
        };
        rates_ok
            && self.thinning.is_binomial()
            && self.deaths.is_none()
            && self.multi_births.is_none()
            && self.rewiring.is_none_or(|r| r.r == 0.0)
            && self.star_rate().is_none()
    }

    pub fn p(&self) -> f64 {
        self.thinning.limit_p()
    }

    pub fn p_k(&self, k: usize) -> f64 {
        self.thinning.p_k(k)
    }

    /// log(1/p).
    pub fn log_inv_p(&self) -> f64 {
        -self.p().ln()
    }

    /// Limit retention q (for general rates, 1 − β).
    pub fn q(&self) -> f64 {
        match &self.rates {
            Rates::DuplicationDivergence { q } => q.limit(),
            Rates::Constrained { alpha } => constrained_q(*alpha, self.p()),
            Rates::General { beta, .. } => 1.0 - beta.limit(),
        }
    }

    pub fn q_k(&self, k: usize) -> f64 {
        match &self.rates {
            Rates::DuplicationDivergence { q } => q.at(k),
            Rates::Constrained { alpha } => constrained_q(*alpha, self.p_k(k)),
            Rates::General { beta, .. } => 1.0 - beta.at(k),
        }
    }

    pub fn alpha(&self) -> f64 {
        match &self.rates {
            Rates::DuplicationDivergence { q } => q.limit() + self.p() * (1.0 - q.limit()),
            Rates::Constrained { alpha } => *alpha,
            Rates::General { alpha, .. } => alpha.limit(),
        }
    }

    pub fn beta(&self) -> f64 {
        match &self.rates {
            Rates::General { beta, .. } => beta.limit(),
            _ => 1.0 - self.q(),
        }
    }

    pub fn alpha_k(&self, k: usize) -> f64 {
        match &self.rates {
            Rates::DuplicationDivergence { q } => {
                let qk = q.at(k);
                qk + self.p_k(k) * (1.0 - qk)
            }
            Rates::Constrained { alpha } => *alpha,
            Rates::General { alpha, .. } => alpha.at(k),
        }
    }

    pub fn beta_k(&self, k: usize) -> f64 {
        match &self.rates {
            Rates::General { beta, .. } => beta.at(k),
            _ => 1.0 - self.q_k(k),
        }
    }

    pub fn delta(&self) -> f64 {
        self.deaths.as_ref().map_or(0.0, |d| d.limit())
    }

    pub fn delta_k(&self, k: usize) -> f64 {
        self.deaths.as_ref().map_or(0.0, |d| d.at(k))
    }

    /// γ = (min_l γ_l) ∧ 1 over the declared envelopes.
    pub fn gamma(&self) -> f64 {
        let mut g = self.thinning.mean_envelope().gamma.min(self.thinning.variance_envelope().gamma);
        match &self.rates {
            Rates::DuplicationDivergence { q } => g = g.min(q.envelope().gamma),
            Rates::General { alpha, beta } => {
                g = g.min(alpha.envelope().gamma).min(beta.envelope().gamma)
            }
            Rates::Constrained { .. } => {}
        }
        if let Some(d) = &self.deaths {
            g = g.min(d.envelope().gamma);
        }
        if let Some(mb) = &self.multi_births {
            if !mb.amplitudes.is_empty() {
                g = g.min(mb.exponent);
            }
        }
        g.min(1.0)
    }
}

fn constrained_q(alpha: f64, p: f64) -> f64 {
    if p >= 1.0 {
        0.0
    } else {
        (alpha - p) / (1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_limits() {
        let s = ModelSpec::basic(0.8, 0.2).unwrap();
        assert!((s.alpha() - 0.84).abs() < 1e-15);
        assert!((s.beta() - 0.8).abs() < 1e-15);
        assert!(s.is_basic() && s.is_constrained());
        assert_eq!(s.gamma(), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelSpec::basic(0.0, 0.2).is_err());
        assert!(ModelSpec::basic(0.5, 1.0).is_err());
        assert!(ModelSpec::basic(0.5, -0.1).is_err());
        assert!(ModelSpec::basic(1.0, 0.0).is_ok());
    }

    #[test]
    fn constrained_family_keeps_alpha() {
        let th = ThinningFamily::perturbed_binomial(0.3, 0.1, 0.5).unwrap();
        let s = ModelSpec::constrained(th, 0.6).unwrap();
        assert!(s.is_constrained());
        for k in [1, 2, 10, 5000] {
            assert!((s.alpha_k(k) - 0.6).abs() < 1e-12);
        }
        let th = ThinningFamily::perturbed_binomial(0.3, 0.1, 0.5).unwrap();
        let s = ModelSpec::new(th, Rates::DuplicationDivergence { q: Sequence::constant(0.2) }).unwrap();
        assert!(!s.is_constrained());
    }

    #[test]
    fn envelope_violation_is_reported() {
        let q = Sequence::custom(0.2, Envelope { c: 0.01, gamma: 1.0 }, |k| 0.2 + 0.05 / k as f64);
        let th = ThinningFamily::binomial(0.5).unwrap();
        let err = ModelSpec::new(th, Rates::DuplicationDivergence { q }).unwrap_err();
        assert!(matches!(err, ModelError::EnvelopeViolated { what: "q", .. }));
    }

    #[test]
    fn multi_birth_validation() {
        let mut lim = BTreeMap::new();
        lim.insert(1, 0.4);
        lim.insert(3, 0.1);
        lim.insert(-1, 0.05);
        let mb = MultiBirth::new(lim.clone());
        assert!((mb.alpha_b() - (0.4 + 0.3 - 0.05)).abs() < 1e-15);
        assert!(ModelSpec::basic(0.5, 0.1).unwrap().with_multi_births(mb).is_ok());
        lim.insert(40, 0.1);
        assert!(ModelSpec::basic(0.5, 0.1).unwrap().with_multi_births(MultiBirth::new(lim)).is_err());
    }

    #[test]
    fn sweep_reaches_limit() {
        let pts = sweep_points(10_000);
        assert_eq!(*pts.last().unwrap(), 10_000);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }
}
