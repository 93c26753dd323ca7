//! Special functions: shifted harmonic sums, log-gamma differences,
//! digamma, and probability rows of the binomial and Poisson laws.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

/// Below this many terms harmonic sums are added up directly.
pub const HARMONIC_DIRECT_LIMIT: u64 = 1000;

const STIRLING_MIN: f64 = 15.0;

/// Tail of the Stirling series: lnΓ(x) − [(x−½)ln x − x + ½ln 2π].
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0 + r2 * (1.0 / 1260.0 + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0)))))
}

pub fn ln_gamma(x: f64) -> f64 {
    if x >= STIRLING_MIN {
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + stirling_tail(x)
    } else {
        statrs_ln_gamma(x)
    }
}

/// lnΓ(y+s) − lnΓ(y) without catastrophic cancellation.
///
/// Requires y > 0 and y + s > 0.
pub fn ln_gamma_shift(y: f64, s: f64) -> f64 {
    debug_assert!(y > 0.0 && y + s > 0.0, "ln_gamma_shift({y}, {s})");
    if s == 0.0 {
        return 0.0;
    }
    let lo = y.min(y + s);
    let mut acc = 0.0;
    let mut y = y;
    if lo < STIRLING_MIN {
        // lnΓ(x) = lnΓ(x+n) − Σ ln(x+i)
        let n = (STIRLING_MIN - lo).ceil() as u32;
        for i in 0..n {
            acc -= (s / (y + i as f64)).ln_1p();
        }
        y += n as f64;
    }
    acc + s * y.ln() + (y + s - 0.5) * (s / y).ln_1p() - s + stirling_tail(y + s)
        - stirling_tail(y)
}

/// Digamma function for x > 0.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    acc + x.ln()
        - 0.5 * r
        - r2 * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0)))))
}

/// h_a(j) = Σ_{l=1}^{j} 1/(l+a), a > −1.
pub fn harmonic(a: f64, j: u64) -> f64 {
    harmonic_diff(a, 0, j as f64)
}

/// h_a(r) − h_a(m) for r ≥ m. `r` may exceed the exact integer range of f64.
pub fn harmonic_diff(a: f64, m: u64, r: f64) -> f64 {
    let mf = m as f64;
    if r <= mf {
        return 0.0;
    }
    if r - mf < HARMONIC_DIRECT_LIMIT as f64 {
        let top = r as u64;
        let mut s = 0.0;
        for l in (m + 1..=top).rev() {
            s += 1.0 / (l as f64 + a);
        }
        s
    } else {
        digamma(r + a + 1.0) - digamma(mf + a + 1.0)
    }
}

/// ln Π_{l=m}^{r−1} (1 − b/(l+a+1)) for r ≥ m and b < m+a+1.
pub fn log_survival(a: f64, b: f64, m: u64, r: f64) -> f64 {
    let mf = m as f64;
    if r <= mf {
        return 0.0;
    }
    if r - mf <= 64.0 {
        let top = r as u64;
        (m..top)
            .map(|l| (-b / (l as f64 + a + 1.0)).ln_1p())
            .sum()
    } else {
        ln_gamma_shift(r + a + 1.0, -b) - ln_gamma_shift(mf + a + 1.0, -b)
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Probabilities of Bi(n, p) at 0..=n.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if p <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if p >= 1.0 {
        out[n] = 1.0;
        return out;
    }
    let q = 1.0 - p;
    if n <= 60 {
        let mut c = 1.0f64;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = c * p.powi(k as i32) * q.powi((n - k) as i32);
            c = c * (n - k) as f64 / (k + 1) as f64;
        }
        return out;
    }
    // Ratio recurrences out of the mode, then one normalization.
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    let ratio = p / q;
    out[mode] = 1.0;
    for k in mode..n {
        out[k + 1] = out[k] * ratio * (n - k) as f64 / (k + 1) as f64;
        if out[k + 1] < 1e-300 {
            break;
        }
    }
    for k in (0..mode).rev() {
        out[k] = out[k + 1] / ratio * (k + 1) as f64 / (n - k) as f64;
        if out[k] < 1e-300 {
            break;
        }
    }
    let total: f64 = out.iter().sum();
    for w in out.iter_mut() {
        *w /= total;
    }
    out
}

/// Probabilities of Po(λ) at 0..=n, with n the first index past λ whose
/// geometric tail bound falls below `tail_tol`. Also returns that bound.
pub fn poisson_pmf(lambda: f64, tail_tol: f64) -> (Vec<f64>, f64) {
    if lambda <= 0.0 {
        return (vec![1.0], 0.0);
    }
    let mode = lambda.floor() as usize;
    let mut out = vec![0.0; mode + 1];
    out[mode] = (mode as f64 * lambda.ln() - lambda - ln_gamma(mode as f64 + 1.0)).exp();
    for k in (0..mode).rev() {
        out[k] = out[k + 1] * (k + 1) as f64 / lambda;
    }
    let mut k = mode;
    loop {
        let next = out[k] * lambda / (k + 1) as f64;
        let kk = (k + 2) as f64;
        let bound = if kk > lambda { next * kk / (kk - lambda) } else { f64::INFINITY };
        out.push(next);
        k += 1;
        if bound < tail_tol {
            return (out, bound);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_switchover_agrees() {
        for &a in &[0.0, -0.5, 0.3, 0.68, 2.5] {
            let mut direct = 0.0;
            for l in 1..=3000u64 {
                direct += 1.0 / (l as f64 + a);
                if (990..=1010).contains(&l) || l == 3000 {
                    let dg = digamma(l as f64 + a + 1.0) - digamma(a + 1.0);
                    assert!((dg - direct).abs() < 1e-13, "a={a} l={l} {dg} {direct}");
                    assert!((harmonic(a, l) - direct).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn digamma_known_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14);
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_shift_matches_direct_products() {
        // Γ(y+n)/Γ(y) = y(y+1)…(y+n−1)
        for &y in &[0.3, 1.0, 7.5, 14.9, 15.0, 40.0, 1e6] {
            for n in 1..6 {
                let direct: f64 = (0..n).map(|i| (y + i as f64).ln()).sum();
                let got = ln_gamma_shift(y, n as f64);
                assert!((got - direct).abs() < 1e-12 * direct.abs().max(1.0), "y={y} n={n}");
            }
        }
        let lhs = ln_gamma_shift(20.5, -0.7);
        let rhs = statrs_ln_gamma(19.8) - statrs_ln_gamma(20.5);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn log_survival_branches_agree() {
        for &(a, b, m) in &[(0.0, 0.5, 10u64), (-0.4, 0.9, 3), (0.36, 1.7, 100)] {
            let r = m + 65;
            let direct: f64 = (m..r)
                .map(|l| (-b / (l as f64 + a + 1.0)).ln_1p())
                .sum();
            let lg = ln_gamma_shift(r as f64 + a + 1.0, -b) - ln_gamma_shift(m as f64 + a + 1.0, -b);
            assert!((direct - lg).abs() < 1e-12, "{direct} {lg}");
            assert!((log_survival(a, b, m, r as f64) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn binomial_rows_normalize() {
        for &n in &[0usize, 1, 5, 60, 61, 400, 5000] {
            for &p in &[0.0, 0.2, 0.5, 0.93, 1.0] {
                let row = binomial_pmf(n, p);
                let s: f64 = row.iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} p={p} s={s}");
                let mean: f64 = row.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
                assert!((mean - n as f64 * p).abs() < 1e-9 * (n as f64).max(1.0));
            }
        }
    }

    #[test]
    fn poisson_row_has_small_tail() {
        for &l in &[0.5, 3.0, 40.0] {
            let (row, tail) = poisson_pmf(l, 1e-17);
            let s: f64 = row.iter().sum();
            assert!(tail < 1e-17);
            assert!((s - 1.0).abs() < 1e-13);
        }
    }
}
