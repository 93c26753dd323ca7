use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson, StandardNormal};

use super::path::{Clock, PathSample, Resolution};
use super::SimError;
use crate::model::thinning::sample_binomial;
use crate::model::ModelSpec;
use crate::rng::{stream_rng, Stream};

const EXACT_LIMIT: u128 = 1 << 53;
const POISSON_EXACT_MAX: f64 = 1e12;
/// States at or above this are reported as overflow rather than risk wrapping.
pub const STATE_LIMIT: u128 = 1 << 120;

fn normal_count<R: Rng + ?Sized>(mean: f64, var: f64, hi: f64, rng: &mut R) -> u128 {
    let z: f64 = StandardNormal.sample(rng);
    (mean + var.sqrt() * z).round().clamp(0.0, hi) as u128
}

/// Bi(n, p) for counts beyond u64; normal approximation once n > 2^53.
pub fn sample_binomial_big<R: Rng + ?Sized>(n: u128, p: f64, rng: &mut R) -> u128 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= EXACT_LIMIT {
        return sample_binomial(n as u64, p, rng) as u128;
    }
    let nf = n as f64;
    normal_count(nf * p, nf * p * (1.0 - p), nf, rng)
}

/// State after time `dt` of a Yule process with per-individual rate α started at k.
/// The increment is NB(k, e^{−αdt}) drawn as Poisson(Gamma(k, e^{αdt} − 1)).
pub fn yule_growth<R: Rng + ?Sized>(k: u128, alpha: f64, dt: f64, rng: &mut R) -> u128 {
    if k == 0 || alpha * dt <= 0.0 {
        return k;
    }
    let scale = (alpha * dt).exp_m1();
    let kf = k as f64;
    if k > EXACT_LIMIT {
        // NB mean k s, variance k s (1 + s).
        let mean = kf * scale;
        return k.saturating_add(normal_count(mean, mean * (1.0 + scale), f64::MAX, rng));
    }
    let lambda: f64 = Gamma::new(kf, scale).expect("valid gamma").sample(rng);
    let extra = if lambda <= 0.0 {
        0
    } else if lambda > POISSON_EXACT_MAX {
        normal_count(lambda, lambda, f64::MAX, rng)
    } else {
        Poisson::new(lambda).expect("valid poisson").sample(rng) as u128
    };
    k.saturating_add(extra)
}

/// Catastrophe-skeleton simulation of the basic model on [0, t_max].
///
/// Records every catastrophe, every checkpoint, and t_max. Stops at absorption.
/// Fails with `StateOverflow` once the state reaches [`STATE_LIMIT`].
pub fn simulate_basic_fast(
    spec: &ModelSpec,
    x0: u128,
    t_max: f64,
    checkpoints: &[f64],
    seed: u64,
    path: u64,
) -> Result<PathSample, SimError> {
    if !spec.is_basic() {
        return Err(SimError::NotBasic);
    }
    if !(t_max >= 0.0) {
        return Err(SimError::InvalidArgument("t_max must be nonnegative"));
    }
    if let Some(&c) = checkpoints.iter().find(|&&c| c > t_max || c < 0.0) {
        return Err(SimError::CheckpointBeyondHorizon(c));
    }
    let mut marks: Vec<f64> = checkpoints.iter().copied().filter(|&c| c > 0.0).collect();
    marks.push(t_max);
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let alpha = spec.alpha();
    let beta = spec.beta();
    let p = spec.p();
    let mut clock = stream_rng(seed, path, Stream::Clock);
    let mut birth = stream_rng(seed, path, Stream::Birth);
    let mut thin = stream_rng(seed, path, Stream::Thinning);
    let wait = (beta > 0.0).then(|| Exp::new(beta).expect("positive rate"));

    let mut out = PathSample::start(Clock::Continuous, Resolution::Skeleton, 0.0, x0, t_max);
    if x0 == 0 {
        out.absorbed_at = Some(0.0);
        return Ok(out);
    }
    let mut t = 0.0;
    let mut x = x0;
    let mut z = 0u64;
    let mut next_mark = 0;
    let mut next_cat = wait.as_ref().map_or(f64::INFINITY, |w| w.sample(&mut clock));
    while next_mark < marks.len() {
        let mark = marks[next_mark];
        if next_cat <= mark {
            x = yule_growth(x, alpha, next_cat - t, &mut birth);
            if x >= STATE_LIMIT {
                return Err(SimError::StateOverflow { t: next_cat });
            }
            x = sample_binomial_big(x, p, &mut thin);
            t = next_cat;
            z += 1;
            if t > 0.0 && t != *out.times.last().unwrap() {
                out.push(t, x, z);
            }
            if x == 0 {
                out.absorbed_at = Some(t);
                break;
            }
            next_cat = t + wait.as_ref().expect("catastrophes occur").sample(&mut clock);
        } else {
            x = yule_growth(x, alpha, mark - t, &mut birth);
            if x >= STATE_LIMIT {
                return Err(SimError::StateOverflow { t: mark });
            }
            t = mark;
            out.push(t, x, z);
            next_mark += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn yule_single_interval_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (alpha, dt) = (0.7, 1.3);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| yule_growth(1, alpha, dt, &mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let expect = (alpha * dt).exp();
        assert!((mean - expect).abs() < 4.0 * (var / n as f64).sqrt());
        // Geometric on {1, 2, ...} with success e^{−αdt}.
        let p1 = xs.iter().filter(|&&x| x == 1.0).count() as f64 / n as f64;
        assert!((p1 - (-alpha * dt).exp()).abs() < 0.005);
    }

    #[test]
    fn big_counts_stay_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = 1u128 << 70;
        let g = yule_growth(k, 0.5, 1.0, &mut rng);
        let ratio = g as f64 / k as f64;
        assert!((ratio - 0.5f64.exp()).abs() < 1e-6);
        let b = sample_binomial_big(k, 0.3, &mut rng);
        assert!((b as f64 / k as f64 - 0.3).abs() < 1e-6);
    }

    #[test]
    fn overflow_is_an_error() {
        let s = ModelSpec::basic(0.4, 0.55).unwrap();
        let hit = (0..200).any(|i| matches!(simulate_basic_fast(&s, 1, 600.0, &[], 1, i), Err(SimError::StateOverflow { .. })));
        assert!(hit);
        assert_eq!(yule_growth(u128::MAX - 1, 1.0, 5.0, &mut ChaCha8Rng::seed_from_u64(3)), u128::MAX);
    }

    #[test]
    fn skeleton_records_checkpoints() {
        let s = ModelSpec::basic(0.5, 0.3).unwrap();
        let p = simulate_basic_fast(&s, 1, 10.0, &[2.5, 5.0], 9, 0).unwrap();
        assert!(p.is_consistent());
        if p.absorbed_at.is_none() {
            for c in [2.5, 5.0, 10.0] {
                assert!(p.times.contains(&c));
            }
        }
        assert!(matches!(
            simulate_basic_fast(&s, 1, 10.0, &[11.0], 9, 0),
            Err(SimError::CheckpointBeyondHorizon(_))
        ));
    }

    #[test]
    fn rejects_non_basic() {
        let s = ModelSpec::basic(0.5, 0.3).unwrap().with_star_rate(1.0).unwrap();
        assert!(matches!(simulate_basic_fast(&s, 1, 1.0, &[], 0, 0), Err(SimError::NotBasic)));
    }
}
