//! Fritsch–Carlson monotone cubic Hermite interpolation, used by tabulated
//! links. Values are held constant beyond the last knot.

use crate::error::{domain, Result};
use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneSpline<T: Real> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneSpline<T> {
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 2 {
            return domain("a tabulated link needs at least two knots");
        }
        if points[0].0 != T::zero() {
            return domain("the first knot of a tabulated link must be at distance 0");
        }
        let xs: Vec<T> = points.iter().map(|p| p.0).collect();
        let ys: Vec<T> = points.iter().map(|p| p.1).collect();
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return domain("tabulated distances must be strictly increasing");
            }
        }
        for w in ys.windows(2) {
            if w[1] > w[0] {
                return domain("tabulated probabilities must be non-increasing");
            }
        }
        if ys.iter().any(|&y| !(y >= T::zero() && y < T::one())) {
            return domain("tabulated probabilities must lie in [0, 1)");
        }

        let m = xs.len();
        let secants: Vec<T> = (0..m - 1).map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])).collect();
        let mut slopes = vec![T::zero(); m];
        slopes[0] = secants[0];
        slopes[m - 1] = secants[m - 2];
        for k in 1..m - 1 {
            slopes[k] = if secants[k - 1] * secants[k] <= T::zero() {
                T::zero()
            } else {
                (secants[k - 1] + secants[k]) / T::lit(2.0)
            };
        }
        let three = T::lit(3.0);
        for k in 0..m - 1 {
            if secants[k] == T::zero() {
                slopes[k] = T::zero();
                slopes[k + 1] = T::zero();
                continue;
            }
            let a = slopes[k] / secants[k];
            let b = slopes[k + 1] / secants[k];
            let r = a * a + b * b;
            if r > three * three {
                let tau = three / r.sqrt();
                slopes[k] = tau * a * secants[k];
                slopes[k + 1] = tau * b * secants[k];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn knots(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, x: T) -> usize {
        // partition_point: first knot strictly greater than x.
        let idx = self.xs.partition_point(|&k| k <= x);
        idx.saturating_sub(1).min(self.xs.len() - 2)
    }

    pub fn value(&self, x: T) -> T {
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.ys[last];
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn deriv(&self, x: T) -> T {
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return T::zero();
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let six = T::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = T::lit(3.0) * t2 - T::lit(4.0) * t + T::one();
        let d01 = -d00;
        let d11 = T::lit(3.0) * t2 - T::lit(2.0) * t;
        (d00 * self.ys[k] + d01 * self.ys[k + 1]) / h + d10 * self.slopes[k] + d11 * self.slopes[k + 1]
    }

    /// `K''(0+)` when `K'(0) = 0`.
    pub fn second_deriv_at_zero_if_flat(&self) -> Option<T> {
        if self.slopes[0] != T::zero() {
            return None;
        }
        let h = self.xs[1] - self.xs[0];
        let dy = self.ys[1] - self.ys[0];
        Some((T::lit(6.0) * dy / h - T::lit(2.0) * self.slopes[1]) / h)
    }

    /// Smallest `x` with `value(x) = y`, by bisection on the monotone curve.
    pub fn inverse(&self, y: T) -> Result<T> {
        let last = self.xs.len() - 1;
        if y > self.ys[0] || y < self.ys[last] {
            return domain(format!("probability {y} outside the tabulated range"));
        }
        let (mut lo, mut hi) = (T::zero(), self.xs[last]);
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid == lo || mid == hi {
                break;
            }
            if self.value(mid) > y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if self.value(lo) == y { lo } else { hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_stays_monotone() {
        let pts = [(0.0f64, 0.9f64), (0.5, 0.8), (1.0, 0.2), (3.0, 0.19), (4.0, 0.0)];
        let s = MonotoneSpline::new(&pts).unwrap();
        for &(x, y) in &pts {
            assert!((s.value(x) - y).abs() < 1e-15);
        }
        let mut prev = s.value(0.0);
        let mut x = 0.0;
        while x < 5.0 {
            x += 1e-3;
            let v = s.value(x);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn constant_table() {
        let s = MonotoneSpline::new(&[(0.0, 0.3), (2.0, 0.3)]).unwrap();
        assert_eq!(s.value(1.0), 0.3);
        assert_eq!(s.deriv(1.0), 0.0);
        assert_eq!(s.value(10.0), 0.3);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(MonotoneSpline::new(&[(0.0, 0.3)]).is_err());
        assert!(MonotoneSpline::new(&[(0.5, 0.3), (1.0, 0.2)]).is_err());
        assert!(MonotoneSpline::new(&[(0.0, 0.3), (1.0, 0.4)]).is_err());
        assert!(MonotoneSpline::new(&[(0.0, 1.0), (1.0, 0.4)]).is_err());
        assert!(MonotoneSpline::new(&[(0.0, 0.5), (0.0, 0.4)]).is_err());
    }
}
