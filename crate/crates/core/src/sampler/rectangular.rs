//! Exact samplers for rectangular latent position models.
//!
//! The Poisson process on `R^d × R_+` is revealed in arrival order: arrival
//! gaps are unit exponentials (the window volume grows at rate one), and the
//! point arriving at time `t` is uniform on the boundary increment of `H(t)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{domain, usage, Result};
use crate::model::WindowSchedule;
use crate::sampler::config::{LatentConfiguration, Layout};
use crate::Real;

/// Arrival times `t_1 < … < t_n`, partial sums of unit exponentials.
pub fn sample_arrivals<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let mut t = 0.0f64;
    (0..n)
        .map(|_| {
            let gap: f64 = Exp1.sample(rng);
            t += gap;
            T::lit(t)
        })
        .collect()
}

/// Which facet of `∂H(t)` a shell point was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Facet {
    /// One latent coordinate sits at `±g(t)`.
    Spatial,
    /// The auxiliary coordinate sits at `h(t)`.
    Auxiliary,
}

/// A point uniform on the boundary increment of `H(t)`.
///
/// `d/dt |H(t)| = d/dt[(2g)^d]·h + (2g)^d·dh/dt`, and the two terms are in
/// proportion `p : 1 − p`.
pub fn sample_shell_position<T: Real, R: Rng + ?Sized>(
    w: &WindowSchedule<T>,
    t: T,
    rng: &mut R,
) -> Result<(Vec<T>, T, Facet)> {
    if !(t > T::zero()) || !t.is_finite() {
        return domain(format!("arrival time must be positive, got {t}"));
    }
    let d = w.dim();
    let g = w.halfwidth(t).as_f64();
    let h = w.height(t).as_f64();
    let p = w.p().as_f64();
    let mut z: Vec<T> = (0..d).map(|_| T::lit(g * (2.0 * rng.random::<f64>() - 1.0))).collect();
    let spatial = p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p);
    if spatial {
        let k = rng.random_range(0..d);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        z[k] = T::lit(sign * g);
        Ok((z, T::lit(h * rng.random::<f64>()), Facet::Spatial))
    } else {
        Ok((z, T::lit(h), Facet::Auxiliary))
    }
}

fn assemble<T: Real>(w: &WindowSchedule<T>, arrivals: Vec<T>, points: Vec<(Vec<T>, T)>) -> LatentConfiguration<T> {
    let n = arrivals.len();
    let d = w.dim();
    let positions = DMatrix::from_fn(n, d, |i, k| points[i].0[k]);
    let aux = points.into_iter().map(|p| p.1).collect();
    LatentConfiguration { positions, aux, arrivals, layout: Layout::Rectangular(*w) }
}

/// The first `n` nodes of a rectangular LPM, in arrival order.
pub fn sample_rectangular<T: Real, R: Rng + ?Sized>(
    n: usize,
    w: &WindowSchedule<T>,
    rng: &mut R,
) -> Result<LatentConfiguration<T>> {
    if n == 0 {
        return usage("need at least one node");
    }
    let arrivals = sample_arrivals::<T, R>(n, rng);
    let points = arrivals
        .iter()
        .map(|&t| sample_shell_position(w, t, rng).map(|(z, r, _)| (z, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(w, arrivals, points))
}

/// Every node visible in the fixed window `H(t)`; the count is Poisson(t).
pub fn sample_rectangular_window<T: Real, R: Rng + ?Sized>(
    w: &WindowSchedule<T>,
    t: T,
    rng: &mut R,
) -> Result<LatentConfiguration<T>> {
    if !(t > T::zero()) {
        return domain("window time must be positive");
    }
    let limit = t.as_f64();
    let mut arrivals = Vec::new();
    let mut now = 0.0f64;
    loop {
        let gap: f64 = Exp1.sample(rng);
        now += gap;
        if now > limit {
            break;
        }
        arrivals.push(T::lit(now));
    }
    let points = arrivals
        .iter()
        .map(|&s| sample_shell_position(w, s, rng).map(|(z, r, _)| (z, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(w, arrivals, points))
}

/// `n` nodes conditional on the last arrival `t_n = T`: the earlier arrivals
/// are iid Uniform(0, T), sorted.
pub fn sample_rectangular_exchangeable<T: Real, R: Rng + ?Sized>(
    n: usize,
    final_time: T,
    w: &WindowSchedule<T>,
    rng: &mut R,
) -> Result<LatentConfiguration<T>> {
    if n < 2 {
        return usage("the conditional sampler needs n ≥ 2");
    }
    if !(final_time > T::zero()) || !final_time.is_finite() {
        return domain(format!("final arrival time must be positive, got {final_time}"));
    }
    let tf = final_time.as_f64();
    let mut early: Vec<f64> = (0..n - 1).map(|_| tf * rng.random::<f64>()).collect();
    early.sort_by(|a, b| a.total_cmp(b));
    // Ties have probability zero; a zero draw would leave the window empty.
    for (i, v) in early.iter_mut().enumerate() {
        if *v <= 0.0 {
            *v = f64::MIN_POSITIVE * (i + 1) as f64;
        }
    }
    let mut arrivals: Vec<T> = early.into_iter().map(T::lit).collect();
    arrivals.push(final_time);
    if arrivals.windows(2).any(|p| !(p[1] > p[0])) {
        return domain("conditional arrivals collided; retry with a different seed");
    }
    let points = arrivals
        .iter()
        .map(|&s| sample_shell_position(w, s, rng).map(|(z, r, _)| (z, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(w, arrivals, points))
}
