//! Numerical suprema of the link-shape terms that control the learnability
//! rates:
//!
//! * `alpha = sup_{eps_K ≤ x ≤ 2G} |K'(x)| / (√x K(x) ε)`
//! * `beta  = sup_{eps_K ≤ x ≤ 2G} x K(x) / K'(x)²`
//!
//! Both are evaluated on a geometric grid followed by one refinement pass
//! around the argmax.

use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::model::link::{Kernel, LinkFunction};
use crate::Real;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 10_000, refine: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub alpha_at: f64,
    pub beta: f64,
    pub beta_at: f64,
    pub eps_k: f64,
    pub upper: f64,
    pub grid_points: usize,
    /// Ratio between consecutive grid nodes after refinement.
    pub resolution: f64,
}

fn geometric<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    let ratio = (hi / lo).ln() / T::count(points - 1);
    let mut out: Vec<T> = (0..points).map(|k| lo * (ratio * T::count(k)).exp()).collect();
    out[points - 1] = hi;
    out
}

/// Maximum of `f` over `[lo, hi]`, returned as `(value, argmax, ratio)`.
fn grid_sup<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, spec: GridSpec) -> (T, T, T) {
    let grid = geometric(lo, hi, spec.points);
    let (mut best, mut at, mut idx) = (T::neg_infinity(), lo, 0);
    for (k, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v > best {
            best = v;
            at = x;
            idx = k;
        }
    }
    let mut ratio = grid[1] / grid[0];
    if spec.refine && best.is_finite() {
        let a = grid[idx.saturating_sub(1)];
        let b = grid[(idx + 1).min(grid.len() - 1)];
        if b > a {
            let fine = geometric(a, b, spec.points);
            ratio = fine[1] / fine[0];
            for &x in &fine {
                let v = f(x);
                if v > best {
                    best = v;
                    at = x;
                }
            }
        }
    }
    (best, at, ratio)
}

pub fn alpha_beta_diagnostics<T: Real>(
    link: &LinkFunction<T>,
    n: Option<usize>,
    g_of_n: T,
    eps_k: T,
    spec: GridSpec,
) -> Result<AlphaBeta> {
    if !(eps_k > T::zero()) {
        return usage("eps_K must be positive");
    }
    if !(g_of_n > eps_k) {
        return usage(format!("G(n) = {g_of_n} must exceed eps_K = {eps_k}"));
    }
    if spec.points < 2 {
        return usage("diagnostic grid needs at least two points");
    }
    let kern: Kernel<'_, T> = link.kernel(n)?;
    let eps = link.epsilon();
    let upper = T::lit(2.0) * g_of_n;

    let grid = geometric(eps_k, upper, spec.points);
    if grid.iter().all(|&x| kern.deriv(x) == T::zero()) {
        return Err(Error::Diagnostic("K' vanishes on the whole range; beta is undefined".into()));
    }

    let alpha_fn = |x: T| {
        let (k, dk) = kern.value_and_deriv(x);
        dk.abs() / (x.sqrt() * k * eps)
    };
    let beta_fn = |x: T| {
        let (k, dk) = kern.value_and_deriv(x);
        if dk == T::zero() {
            T::infinity()
        } else {
            x * k / (dk * dk)
        }
    };
    let (alpha, alpha_at, ra) = grid_sup(alpha_fn, eps_k, upper, spec);
    let (beta, beta_at, rb) = grid_sup(beta_fn, eps_k, upper, spec);
    Ok(AlphaBeta {
        alpha: alpha.as_f64(),
        alpha_at: alpha_at.as_f64(),
        beta: beta.as_f64(),
        beta_at: beta_at.as_f64(),
        eps_k: eps_k.as_f64(),
        upper: upper.as_f64(),
        grid_points: spec.points,
        resolution: ra.max(rb).as_f64(),
    })
}
