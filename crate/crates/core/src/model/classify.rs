use serde::{Deserialize, Serialize};

use super::roots::x_star;
use super::spec::ModelSpec;
use super::ModelError;

/// |margin| at or below this is reported as null recurrent.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Process {
    #[serde(rename = "X_star")]
    XStar,
    #[serde(rename = "X_tilde")]
    XTilde,
    #[serde(rename = "X_star_b")]
    XStarB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    GeometricallyErgodic,
    NullRecurrent,
    Transient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub process: Process,
    pub verdict: Verdict,
    pub margin: f64,
    pub eta_star: Option<f64>,
    pub region: Option<Region>,
}

fn verdict_of(margin: f64) -> Verdict {
    if margin.abs() <= BOUNDARY_TOL {
        Verdict::NullRecurrent
    } else if margin < 0.0 {
        Verdict::GeometricallyErgodic
    } else {
        Verdict::Transient
    }
}

/// Growth rate and effective catastrophe weight entering the margin.
fn margin_parts(spec: &ModelSpec, process: Process) -> (f64, f64) {
    let l = spec.log_inv_p();
    let beta = spec.beta();
    match process {
        Process::XStar => (spec.alpha() - spec.delta(), beta * l),
        Process::XTilde => (spec.alpha(), spec.p() * beta * l),
        Process::XStarB => {
            let growth = match spec.multi_births() {
                Some(mb) => mb.alpha_b(),
                None => spec.alpha() - spec.delta(),
            };
            (growth, beta * l)
        }
    }
}

pub fn classify(spec: &ModelSpec, process: Process) -> RegimeReport {
    let (growth, drag) = margin_parts(spec, process);
    let margin = growth - drag;
    let verdict = verdict_of(margin);
    let eta_star = if verdict == Verdict::GeometricallyErgodic {
        eta_star(spec, process).ok()
    } else {
        None
    };
    RegimeReport { process, verdict, margin, eta_star, region: basic_region(spec) }
}

/// Supremum of finite stationary moments: x*(u)/log(1/p).
pub fn eta_star(spec: &ModelSpec, process: Process) -> Result<f64, ModelError> {
    let (growth, drag) = margin_parts(spec, process);
    let margin = growth - drag;
    if verdict_of(margin) != Verdict::GeometricallyErgodic || !(growth > 0.0) {
        return Err(ModelError::NotErgodic(margin));
    }
    Ok(x_star(drag / growth)? / spec.log_inv_p())
}

/// Region of the (p, q) plane, defined for the basic DD model only.
fn basic_region(spec: &ModelSpec) -> Option<Region> {
    if !spec.is_basic() {
        return None;
    }
    let (a, b, l, p) = (spec.alpha(), spec.beta(), spec.log_inv_p(), spec.p());
    Some(if a < p * b * l {
        Region::A
    } else if a <= b * l {
        Region::B
    } else {
        Region::C
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::{Rates, Sequence};
    use crate::model::{q1, q2, ThinningFamily};

    #[test]
    fn transient_example() {
        let s = ModelSpec::basic(0.8, 0.2).unwrap();
        let r = classify(&s, Process::XStar);
        assert_eq!(r.verdict, Verdict::Transient);
        let expected = 0.84 - 0.8 * 1.25f64.ln();
        assert!((r.margin - expected).abs() < 1e-15);
        assert!((r.margin - 0.6615).abs() < 1e-4);
        assert_eq!(r.region, Some(Region::C));
        assert!(r.eta_star.is_none());
    }

    #[test]
    fn weighted_ergodic_example() {
        let s = ModelSpec::basic(0.3, 0.0).unwrap();
        let r = classify(&s, Process::XTilde);
        assert_eq!(r.verdict, Verdict::GeometricallyErgodic);
        assert!(r.margin < 0.0);
        assert_eq!(r.region, Some(Region::A));
        assert!(r.eta_star.unwrap() > 0.0);
    }

    #[test]
    fn exact_zero_margin_is_null() {
        let p: f64 = 0.5;
        let alpha = 0.6;
        let beta = alpha / -p.ln();
        let th = ThinningFamily::binomial(p).unwrap();
        let s = ModelSpec::new(
            th,
            Rates::General { alpha: Sequence::constant(alpha), beta: Sequence::constant(beta) },
        )
        .unwrap();
        let r = classify(&s, Process::XStar);
        assert_eq!(r.verdict, Verdict::NullRecurrent);
        assert!(r.eta_star.is_none());
    }

    #[test]
    fn eta_star_below_beta_over_alpha() {
        for &(p, q) in &[(0.1, 0.2), (0.3, 0.05), (0.5, 0.4), (0.05, 0.7)] {
            let s = ModelSpec::basic(p, q).unwrap();
            let r = classify(&s, Process::XStar);
            if r.verdict == Verdict::GeometricallyErgodic {
                assert!(r.eta_star.unwrap() < s.beta() / s.alpha());
            }
        }
    }

    #[test]
    fn regions_follow_boundary_curves() {
        for &p in &[0.05, 0.1, (-2.0f64).exp(), 0.2, 0.3] {
            let (b1, b2) = (q1(p), q2(p));
            let below = |q: f64| ModelSpec::basic(p, q).unwrap();
            if b2 > 1e-6 {
                assert_eq!(classify(&below(b2 - 1e-6), Process::XTilde).region, Some(Region::A));
            }
            assert_eq!(classify(&below(b2.max(0.0) + 1e-6), Process::XTilde).region, Some(Region::B));
            if b1 + 1e-6 < 1.0 {
                assert_eq!(classify(&below(b1 + 1e-6), Process::XStar).region, Some(Region::C));
            }
        }
    }
}
