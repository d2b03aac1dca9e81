//! Exchangeable baselines: iid isotropic Gaussian positions.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, usage, Result};
use crate::sampler::config::{LatentConfiguration, Layout};
use crate::Real;

fn gaussian_positions<T: Real, R: Rng + ?Sized>(n: usize, d: usize, sigma2: T, rng: &mut R) -> Result<DMatrix<T>> {
    if n == 0 || d == 0 {
        return usage("need n ≥ 1 and d ≥ 1");
    }
    if !(sigma2 > T::zero()) {
        return domain(format!("sigma2 must be positive, got {sigma2}"));
    }
    let sd = sigma2.as_f64().sqrt();
    // Row-major draw order so that row i depends only on the first i rows' draws.
    let mut buf = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        let x: f64 = StandardNormal.sample(rng);
        buf.push(T::lit(sd * x));
    }
    Ok(DMatrix::from_row_slice(n, d, &buf))
}

/// `n` iid `N(0, σ² I_d)` positions; arrivals are `1..=n`.
pub fn sample_exchangeable_gaussian<T: Real, R: Rng + ?Sized>(
    n: usize,
    d: usize,
    sigma2: T,
    rng: &mut R,
) -> Result<LatentConfiguration<T>> {
    let positions = gaussian_positions(n, d, sigma2, rng)?;
    Ok(LatentConfiguration {
        positions,
        aux: vec![T::zero(); n],
        arrivals: (1..=n).map(T::count).collect(),
        layout: Layout::ExchangeableGaussian { sigma2 },
    })
}

/// Same positions as [`sample_exchangeable_gaussian`] but tagged for the
/// sparse-graphon model, whose link depends on `n`.
pub fn sample_sparse_graphon_config<T: Real, R: Rng + ?Sized>(
    n: usize,
    d: usize,
    sigma2: T,
    rng: &mut R,
) -> Result<LatentConfiguration<T>> {
    let mut c = sample_exchangeable_gaussian(n, d, sigma2, rng)?;
    c.layout = Layout::SparseGraphon { sigma2 };
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use crate::stats::{mean, variance};

    #[test]
    fn coordinate_variance() {
        let c = sample_exchangeable_gaussian(50_000, 2, 2.5f64, &mut rng_from(1)).unwrap();
        let xs: Vec<f64> = c.positions().iter().copied().collect();
        assert_eq!(xs.len(), 100_000);
        assert!((variance(&xs) / 2.5 - 1.0).abs() < 0.05);
    }

    #[test]
    fn squared_norm_is_chi_square() {
        let c = sample_exchangeable_gaussian(100_000, 3, 1.7f64, &mut rng_from(2)).unwrap();
        let r: Vec<f64> = c.positions().row_iter().map(|row| row.norm_squared() / 1.7).collect();
        assert!((mean(&r) / 3.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn reproducible() {
        let a = sample_exchangeable_gaussian(30, 2, 1.0f64, &mut rng_from(5)).unwrap();
        let b = sample_exchangeable_gaussian(30, 2, 1.0f64, &mut rng_from(5)).unwrap();
        assert_eq!(a, b);
        assert!(sample_exchangeable_gaussian(0, 2, 1.0f64, &mut rng_from(5)).is_err());
        assert!(sample_exchangeable_gaussian(3, 2, 0.0f64, &mut rng_from(5)).is_err());
    }
}
