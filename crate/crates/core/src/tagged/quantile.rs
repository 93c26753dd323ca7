use serde::{Deserialize, Serialize};

use super::SimError;
use crate::special::{harmonic_diff, log_survival};

/// Past this landing size the search gives up and reports +∞.
const LANDING_CAP: f64 = 1e300;

/// One quantile-coupled draw of (E_b, V_a(m, b)) from a single uniform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledDraw {
    pub e_b: f64,
    pub v: f64,
    /// Step index r of the jump: the chain moves from size r to r + 1.
    pub r: f64,
}

impl CoupledDraw {
    /// Graph size right after the jump.
    pub fn landing(&self) -> f64 {
        self.r + 1.0
    }
}

/// φ = (1 + α_max)/2.
pub fn default_phi(alpha_max: f64) -> f64 {
    0.5 * (1.0 + alpha_max)
}

/// Smallest c with ln(1 − x) ≥ −x − c x² on (0, φ).
pub fn c_phi(phi: f64) -> f64 {
    if phi < 1e-4 {
        return 0.5 + phi / 3.0;
    }
    (-phi - (-phi).ln_1p()) / (phi * phi)
}

/// Landing size N ≥ m + 1 of the jump whose per-step probability at size l
/// is b/(l + a + 1): the smallest N with Π_{l=m}^{N−1}(1 − b/(l+a+1)) ≤ 1 − u.
pub fn landing_step(m: u64, a: f64, b: f64, u: f64) -> f64 {
    if b <= 0.0 {
        return f64::INFINITY;
    }
    let target = (-u).ln_1p();
    let mf = m as f64;
    let below = |r: f64| log_survival(a, b, m, r) <= target;
    if below(mf + 1.0) {
        return mf + 1.0;
    }
    // Exponential search for an upper end, then bisection on integers.
    let mut lo = mf + 1.0;
    let mut step = 1.0;
    let mut hi = lo + step;
    while !below(hi) {
        lo = hi;
        step *= 2.0;
        hi = (mf + 1.0 + step).floor();
        if hi > LANDING_CAP {
            return f64::INFINITY;
        }
    }
    loop {
        let mid = (0.5 * (lo + hi)).floor();
        if mid <= lo || mid >= hi {
            return hi;
        }
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// E_b = −ln(1 − u)/b and V = h_a(r + 1) − h_a(m) from the same u.
pub fn quantile_couple(m: u64, a: f64, b: f64, u: f64, phi: f64) -> Result<CoupledDraw, SimError> {
    if !(a > -1.0) || !(b >= 0.0) || !(0.0..1.0).contains(&u) || !(phi > 0.0 && phi < 1.0) {
        return Err(SimError::InvalidArgument("quantile_couple needs a > -1, b >= 0, 0 <= u < 1, 0 < phi < 1"));
    }
    if b / (m as f64 + a + 1.0) > phi {
        return Err(SimError::CouplingPrecondition { m, a, b, phi });
    }
    let landing = landing_step(m, a, b, u);
    let e_b = if b > 0.0 { -(-u).ln_1p() / b } else { f64::INFINITY };
    let v = harmonic_diff(a, m, landing);
    Ok(CoupledDraw { e_b, v, r: landing - 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_quantile_hits_first_support_point() {
        let d = quantile_couple(10, 0.0, 1.5, 0.0, 0.9).unwrap();
        assert_eq!(d.e_b, 0.0);
        assert_eq!(d.r, 10.0);
        assert!((d.v - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn precondition_enforced() {
        assert!(matches!(
            quantile_couple(1, 0.0, 1.95, 0.3, 0.9),
            Err(SimError::CouplingPrecondition { .. })
        ));
    }

    #[test]
    fn landing_matches_linear_scan() {
        let (m, a, b) = (5u64, 0.4, 2.3);
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let mut g = 1.0;
            let mut n = m;
            while g > 1.0 - u {
                g *= 1.0 - b / (n as f64 + a + 1.0);
                n += 1;
            }
            assert_eq!(landing_step(m, a, b, u), n as f64, "u = {u}");
        }
    }

    #[test]
    fn sandwich_holds_pathwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = 0.8;
        let c = c_phi(phi);
        for &m in &[1u64, 10, 1000, 100_000] {
            let a = 0.2;
            let b = phi * (m as f64 + a + 1.0) * 0.9;
            for _ in 0..2000 {
                let u: f64 = rng.random();
                let d = quantile_couple(m, a, b, u, phi).unwrap();
                let gap = d.e_b - d.v;
                assert!(gap >= -1.0 / (d.landing() + a) - 1e-12);
                assert!(gap <= c * b * d.v / (m as f64 + a + 1.0) + 1e-12);
            }
        }
    }

    #[test]
    fn huge_landing_steps() {
        let n = landing_step(1000, 0.0, 0.5, 1.0 - 1e-12);
        assert!(n > 1e20 && n.is_finite());
    }
}
