//! High-probability norm bounds `G(n)` on the latent positions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RegularityBound<T: Real> {
    /// `G(n) = 2 √d · n^{p/d}`.
    Rectangular { d: usize, p: T },
    /// `G(n) = sqrt(2 σ² (1 + c) log n)`, with `log n` floored at `log 2`.
    Gaussian { sigma2: T, c: T },
}

impl<T: Real> RegularityBound<T> {
    pub fn rectangular(d: usize, p: T) -> Result<Self> {
        if d == 0 || !(p >= T::zero() && p <= T::one()) {
            return domain("rectangular bound needs d ≥ 1 and p in [0,1]");
        }
        Ok(Self::Rectangular { d, p })
    }

    pub fn gaussian(sigma2: T, c: T) -> Result<Self> {
        if !(sigma2 > T::zero()) || !(c > T::zero()) {
            return domain("Gaussian bound needs sigma2 > 0 and c > 0");
        }
        Ok(Self::Gaussian { sigma2, c })
    }

    pub fn at(&self, n: usize) -> T {
        let n = n.max(1);
        match *self {
            Self::Rectangular { d, p } => {
                let d_t = T::count(d);
                T::lit(2.0) * d_t.sqrt() * T::count(n).powf(p / d_t)
            }
            Self::Gaussian { sigma2, c } => {
                let logn = T::count(n.max(2)).ln();
                (T::lit(2.0) * sigma2 * (T::one() + c) * logn).sqrt()
            }
        }
    }
}
