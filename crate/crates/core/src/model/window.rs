//! Rectangular observation windows `H(t) = [-g(t), g(t)]^d × [0, h(t)]` with
//! `g(t) = t^{p/d}` and `h(t) = t / (2 g(t))^d`, so that `|H(t)| = t`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSchedule<T: Real> {
    d: usize,
    p: T,
}

/// Window extents at a single time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowGeometry<T: Real> {
    /// Half-width of the latent box.
    pub g: T,
    /// Height of the auxiliary interval.
    pub h: T,
    pub volume: T,
}

impl<T: Real> WindowSchedule<T> {
    pub fn new(d: usize, p: T) -> Result<Self> {
        if d == 0 {
            return domain("latent dimension must be at least 1");
        }
        if !(p >= T::zero() && p <= T::one()) {
            return domain(format!("sparsity exponent p must lie in [0,1], got {p}"));
        }
        Ok(Self { d, p })
    }

    /// The one-dimensional Poisson random connection model (`d = 1, p = 1`).
    pub fn random_connection() -> Self {
        Self { d: 1, p: T::one() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> T {
        self.p
    }

    #[inline]
    pub fn halfwidth(&self, t: T) -> T {
        t.powf(self.p / T::count(self.d))
    }

    #[inline]
    pub fn height(&self, t: T) -> T {
        T::lit(2.0).powi(-(self.d as i32)) * t.powf(T::one() - self.p)
    }

    pub fn geometry(&self, t: T) -> Result<WindowGeometry<T>> {
        if !(t > T::zero()) || !t.is_finite() {
            return domain(format!("window time must be positive, got {t}"));
        }
        let g = self.halfwidth(t);
        let h = self.height(t);
        let volume = (T::lit(2.0) * g).powi(self.d as i32) * h;
        Ok(WindowGeometry { g, h, volume })
    }

    /// Membership of a point `(z, r)` in `H(t)`.
    pub fn contains(&self, t: T, z: &[T], r: T) -> bool {
        let g = self.halfwidth(t);
        let h = self.height(t);
        z.iter().all(|&x| x.abs() <= g) && r >= T::zero() && r <= h
    }

    /// Expected edge-count exponent `2 − p`.
    pub fn sparsity_exponent(&self) -> T {
        T::lit(2.0) - self.p
    }
}
