//! Scalar root solvers for the phase diagram.

use super::ModelError;

const ROOT_TOL: f64 = 1e-13;

/// Safeguarded Newton on an increasing function with f(lo) < 0 < f(hi).
fn newton_bisect(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        x = if dfx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= ROOT_TOL * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Root in (0, 1] of p e^p = e^{−q/(1−q)}.
pub fn p_star(q: f64) -> f64 {
    assert!((0.0..1.0).contains(&q), "p_star needs 0 <= q < 1");
    // Solve x + e^x = −c for x = log p; the root lies in [−c−1, −c].
    let c = q / (1.0 - q);
    let x = newton_bisect(|x| (x + x.exp() + c, 1.0 + x.exp()), -c - 1.0, -c);
    x.exp()
}

/// Upper edge of region B (X* boundary): q₁ = (L − p)/(1 + L − p).
pub fn q1(p: f64) -> f64 {
    let l = -p.ln();
    (l - p) / (1.0 + l - p)
}

/// Upper edge of region A (X̃ boundary): q₂ = (pL − p)/(1 − p + pL).
pub fn q2(p: f64) -> f64 {
    let l = -p.ln();
    (p * l - p) / (1.0 - p + p * l)
}

pub fn region_boundaries(p: f64) -> (f64, f64) {
    (q1(p), q2(p))
}

/// Positive root of x = u(1 − e^{−x}) for u > 1.
pub fn x_star(u: f64) -> Result<f64, ModelError> {
    if !(u > 1.0) || !u.is_finite() {
        return Err(ModelError::NoPositiveRoot(u));
    }
    // g(x) = x − u(1 − e^{−x}) is convex with g(0) = 0, g'(0) < 0 and g(u) > 0.
    let g = |x: f64| x + u * (-x).exp_m1();
    let mut lo = (u - 1.0) / u;
    while g(lo) >= 0.0 && lo > 1e-300 {
        lo *= 0.5;
    }
    if g(lo) >= 0.0 {
        return Ok(0.0);
    }
    Ok(newton_bisect(|x| (g(x), 1.0 - u * (-x).exp()), lo, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn p_star_at_zero() {
        assert!((p_star(0.0) - 0.567_143_290_409_783_8).abs() < 1e-12);
    }

    #[test]
    fn p_star_matches_bisection() {
        for &q in &[0.1f64, 0.5, 0.8, 0.95] {
            let c = q / (1.0 - q);
            let oracle = bisect(|p: f64| p * p.exp() - (-c).exp(), 0.0, 1.0);
            assert!((p_star(q) - oracle).abs() < 1e-12, "q={q}");
        }
        assert!(p_star(0.999_999) < 1e-300);
    }

    #[test]
    fn p_star_decreasing() {
        let mut prev = 1.0;
        for i in 0..100 {
            let v = p_star(i as f64 / 100.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn q2_maximum_and_zero() {
        let p = (-2.0f64).exp();
        let e2 = 2.0f64.exp();
        assert!((q2(p) - 1.0 / (e2 + 1.0)).abs() < 1e-15);
        assert!(q2((-1.0f64).exp()).abs() < 1e-15);
        for i in 1..1000 {
            assert!(q2(i as f64 / 1000.0) <= q2(p) + 1e-15);
        }
    }

    #[test]
    fn q2_matches_bisection_on_defining_equation() {
        // α = pβL with α = q + p(1−q), β = 1−q.
        for &p in &[0.05, 0.3, (-2.0f64).exp()] {
            let l = -f64::ln(p);
            let oracle = bisect(|q| q + p * (1.0 - q) - p * (1.0 - q) * l, -1.0, 1.0 - 1e-12);
            assert!((q2(p) - oracle).abs() < 1e-12, "p={p}");
        }
        assert!((q2(0.3) - 0.057_663_3).abs() < 1e-7);
    }

    #[test]
    fn q1_inverts_p_star() {
        for &p in &[0.05, 0.2, 0.4, 0.56] {
            assert!((p_star(q1(p)) - p).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn x_star_oracle() {
        let oracle = bisect(|x| x - 2.0 * (1.0 - (-x).exp()), 1e-9, 2.0);
        assert!((x_star(2.0).unwrap() - oracle).abs() < 1e-12);
        assert!(x_star(1.0).is_err());
        assert!(x_star(0.5).is_err());
        let small = x_star(1.0 + 1e-6).unwrap();
        assert!(small > 0.0 && small < 1e-5);
        for i in 1..=1000 {
            let u = 1.0 + i as f64 * 0.099;
            let x = x_star(u).unwrap();
            // u − x* = u e^{−x*} drops below one ulp of u once u exceeds ~37.
            if u * (-u).exp() > 4.0 * f64::EPSILON * u {
                assert!(x < u && x > 0.0, "u={u}");
            } else {
                assert!(x <= u && x > 0.0);
            }
            assert!((x - u * (1.0 - (-x).exp())).abs() < 1e-10);
        }
    }
}
