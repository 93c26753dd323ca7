//! Declarative model documents (JSON-compatible).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::spec::{ModelSpec, MultiBirth, Rates, RewiringMode, Sequence, DEFAULT_J_MAX};
use super::thinning::ThinningFamily;
use super::ModelError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum ThinningConfig {
    Binomial,
}

/// x_k = limit + amplitude·k^{−exponent}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub amplitude: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PerturbationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<PerturbationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<PerturbationConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiBirthConfig {
    /// Jump size j (as a string key, "-1", "1", "2", ...) to limit rate a_{*,j}.
    pub limits: BTreeMap<String, f64>,
    #[serde(default)]
    pub amplitudes: BTreeMap<String, f64>,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default = "default_j_max")]
    pub j_max: i64,
}

fn default_exponent() -> f64 {
    1.0
}

fn default_j_max() -> i64 {
    DEFAULT_J_MAX
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewiringModeConfig {
    #[default]
    Independent,
    WithoutReplacement,
}

/// Model section of a run config. Exactly one of `q`, `alpha` (constrained
/// family), or the pair `alpha` + `beta` (general rates) selects the rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default)]
    pub rewiring_mode: RewiringModeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_thinning")]
    pub thinning: ThinningConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_births: Option<MultiBirthConfig>,
    #[serde(default)]
    pub perturbations: Perturbations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_rate: Option<f64>,
    #[serde(default)]
    pub source_link: bool,
}

fn default_thinning() -> ThinningConfig {
    ThinningConfig::Binomial
}

fn seq(limit: f64, pert: Option<PerturbationConfig>) -> Sequence {
    match pert {
        Some(pc) => Sequence::power(limit, pc.amplitude, pc.exponent),
        None => Sequence::constant(limit),
    }
}

fn parse_keys(map: &BTreeMap<String, f64>) -> Result<BTreeMap<i64, f64>, ModelError> {
    map.iter()
        .map(|(k, &v)| {
            k.trim()
                .parse::<i64>()
                .map(|j| (j, v))
                .map_err(|_| ModelError::InvalidParameter {
                    name: "multi_births key",
                    value: f64::NAN,
                    reason: "keys must be integers",
                })
        })
        .collect()
}

impl ModelConfig {
    pub fn basic(p: f64, q: f64) -> Self {
        Self {
            p,
            q: Some(q),
            alpha: None,
            beta: None,
            r: None,
            rewiring_mode: RewiringModeConfig::Independent,
            delta: None,
            thinning: ThinningConfig::Binomial,
            multi_births: None,
            perturbations: Perturbations::default(),
            star_rate: None,
            source_link: false,
        }
    }

    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        let thinning = match self.perturbations.p {
            Some(pc) => ThinningFamily::perturbed_binomial(self.p, pc.amplitude, pc.exponent)?,
            None => ThinningFamily::binomial(self.p)?,
        };
        let rates = match (self.q, self.alpha, self.beta) {
            (Some(q), None, None) => Rates::DuplicationDivergence { q: seq(q, self.perturbations.q) },
            (None, Some(alpha), None) => Rates::Constrained { alpha },
            (None, Some(alpha), Some(beta)) => Rates::General {
                alpha: Sequence::constant(alpha),
                beta: Sequence::constant(beta),
            },
            _ => {
                return Err(ModelError::InvalidParameter {
                    name: "q/alpha/beta",
                    value: f64::NAN,
                    reason: "give exactly one of: q, alpha, or alpha with beta",
                })
            }
        };
        let mut spec = ModelSpec::new(thinning, rates)?;
        if let Some(d) = self.delta {
            spec = spec.with_deaths(seq(d, self.perturbations.delta))?;
        }
        if let Some(mb) = &self.multi_births {
            spec = spec.with_multi_births(MultiBirth {
                limits: parse_keys(&mb.limits)?,
                amplitudes: parse_keys(&mb.amplitudes)?,
                exponent: mb.exponent,
                j_max: mb.j_max,
            })?;
        }
        if let Some(r) = self.r {
            let mode = match self.rewiring_mode {
                RewiringModeConfig::Independent => RewiringMode::Independent,
                RewiringModeConfig::WithoutReplacement => RewiringMode::WithoutReplacement,
            };
            spec = spec.with_rewiring(r, mode)?;
        }
        if let Some(s) = self.star_rate {
            spec = spec.with_star_rate(s)?;
        }
        Ok(spec.with_source_link(self.source_link))
    }
}
