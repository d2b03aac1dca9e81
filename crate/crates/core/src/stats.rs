//! Small statistics toolkit used by the samplers' self-checks and the
//! experiment runners. Inputs are plain `f64` slices.

use rand::seq::SliceRandom;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{usage, Result};
use crate::scalar::CompensatedSum;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum<f64>>().value() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: CompensatedSum<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    ss.value() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Coefficient of variation `sd / |mean|`.
pub fn coefficient_of_variation(xs: &[f64]) -> f64 {
    variance(xs).sqrt() / mean(xs).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return usage("least squares needs at least two paired points");
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return usage("least squares needs distinct abscissae");
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(SlopeFit { slope, intercept, stderr })
}

/// One-sample Kolmogorov–Smirnov test against Uniform(lo, hi).
/// Returns `(D, p-value)` with the asymptotic Kolmogorov distribution and
/// the Stephens small-sample correction.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let mut u: Vec<f64> = samples.iter().map(|x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).collect();
    u.sort_by(|a, b| a.total_cmp(b));
    let n = u.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in u.iter().enumerate() {
        let above = (i as f64 + 1.0) / n - v;
        let below = v - i as f64 / n;
        d = d.max(above).max(below);
    }
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Welch two-sample t-test; returns `(t, two-sided p)`.
pub fn welch_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a) / a.len() as f64, variance(b) / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        return if ma == mb { (0.0, 1.0) } else { (f64::INFINITY, 0.0) };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (t, 2.0 * (1.0 - dist.cdf(t.abs())))
}

/// Total-variation distance between two empirical distributions over
/// categories `0..k`, given per-category counts.
pub fn total_variation(counts_a: &[u64], counts_b: &[u64]) -> f64 {
    let na: u64 = counts_a.iter().sum();
    let nb: u64 = counts_b.iter().sum();
    0.5 * counts_a
        .iter()
        .zip(counts_b)
        .map(|(&x, &y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
        .sum::<f64>()
}

fn histogram(codes: &[u64], k: usize) -> Vec<u64> {
    let mut h = vec![0u64; k];
    for &c in codes {
        h[c as usize] += 1;
    }
    h
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PermutationTest {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
}

/// Permutation test of equal categorical distributions using the TV
/// distance as statistic. `p = (1 + #{TV_perm ≥ TV_obs}) / (1 + B)`.
pub fn permutation_tv_test<R: rand::Rng + ?Sized>(
    a: &[u64],
    b: &[u64],
    categories: usize,
    permutations: usize,
    rng: &mut R,
) -> PermutationTest {
    let observed = total_variation(&histogram(a, categories), &histogram(b, categories));
    let mut pooled: Vec<u64> = a.iter().chain(b).copied().collect();
    let mut exceed = 0usize;
    for _ in 0..permutations {
        pooled.shuffle(rng);
        let (pa, pb) = pooled.split_at(a.len());
        let tv = total_variation(&histogram(pa, categories), &histogram(pb, categories));
        if tv >= observed - 1e-15 {
            exceed += 1;
        }
    }
    PermutationTest {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        permutations,
    }
}

/// Standard deviation of a binomial frequency with success probability `q`
/// over `trials` draws.
pub fn binomial_sd(q: f64, trials: usize) -> f64 {
    (q * (1.0 - q) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(median(&xs), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn least_squares_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let f = least_squares(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-14);
        assert!(f.stderr.abs() < 1e-12);
        assert!(least_squares(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Standard critical values: Q(1.3581) ≈ 0.05, Q(1.6276) ≈ 0.01.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_skew() {
        let mut rng = rng_from(5);
        let u: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        assert!(ks_uniform(&u, -2.0, 2.0).1 > 0.01);
        let s: Vec<f64> = (0..2000).map(|_| rng.random::<f64>().powi(2)).collect();
        assert!(ks_uniform(&s, 0.0, 1.0).1 < 1e-6);
    }

    #[test]
    fn welch_detects_shift() {
        let mut rng = rng_from(9);
        let a: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..500).map(|_| rng.random::<f64>() + 0.2).collect();
        let c: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        assert!(welch_t(&a, &b).1 < 1e-6);
        assert!(welch_t(&a, &c).1 > 0.001);
    }

    #[test]
    fn permutation_test_behaviour() {
        let mut rng = rng_from(3);
        let a: Vec<u64> = (0..2000).map(|_| (rng.random::<f64>() < 0.3) as u64).collect();
        let b: Vec<u64> = (0..2000).map(|_| (rng.random::<f64>() < 0.3) as u64).collect();
        let c: Vec<u64> = (0..2000).map(|_| (rng.random::<f64>() < 0.4) as u64).collect();
        assert!(permutation_tv_test(&a, &b, 2, 199, &mut rng).p_value > 0.01);
        assert!(permutation_tv_test(&a, &c, 2, 199, &mut rng).p_value <= 0.01);
        let same = permutation_tv_test(&a, &a, 2, 49, &mut rng);
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
    }
}
