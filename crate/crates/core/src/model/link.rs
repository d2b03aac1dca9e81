//! Link probability functions: the map from latent distance to edge
//! probability.
//!
//! A [`LinkFunction`] is the user-facing, validated description. Hot loops
//! resolve it once into a [`Kernel`] (fixing the graph size for the
//! size-dependent sparse-graphon family) and then evaluate infallibly.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, usage, Error, Result};
use crate::model::spline::MonotoneSpline;
use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum LinkKind<T: Real> {
    /// `K(δ) = 1 / (C + δ^a)`.
    Polynomial { c: T, a: T },
    /// `K(δ) = 1 / (1 + τ e^δ)`.
    LogisticExp { tau: T },
    /// `K_n(δ) = min(n^{-p_s} K(δ), 1)` for a size-free base link.
    ScaledGraphon { base: Box<LinkFunction<T>>, p_s: T },
    /// Monotone cubic interpolation of tabulated `(δ, K(δ))` pairs.
    Custom(MonotoneSpline<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkFunction<T: Real> {
    kind: LinkKind<T>,
    eps: T,
}

impl<T: Real> LinkFunction<T> {
    pub fn polynomial(c: T, a: T) -> Result<Self> {
        if !(c > T::one()) || !c.is_finite() {
            return domain(format!("polynomial link needs C > 1, got {c}"));
        }
        if !(a > T::zero()) || !a.is_finite() {
            return domain(format!("polynomial link needs a > 0, got {a}"));
        }
        Ok(Self { eps: T::one() - T::one() / c, kind: LinkKind::Polynomial { c, a } })
    }

    pub fn logistic_exp(tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return domain(format!("logistic-exponential link needs tau > 0, got {tau}"));
        }
        Ok(Self { eps: tau / (T::one() + tau), kind: LinkKind::LogisticExp { tau } })
    }

    /// The margin of the base link is kept: `n^{-p_s} ≤ 1` can only lower `K`.
    pub fn scaled_graphon(base: LinkFunction<T>, p_s: T) -> Result<Self> {
        if !(p_s >= T::zero() && p_s <= T::one()) {
            return domain(format!("sparse-graphon exponent must lie in [0,1], got {p_s}"));
        }
        if base.needs_size() {
            return usage("sparse-graphon base link must not itself depend on n");
        }
        Ok(Self { eps: base.eps, kind: LinkKind::ScaledGraphon { base: Box::new(base), p_s } })
    }

    /// Knots must start at δ = 0 with strictly increasing abscissae and
    /// non-increasing values in `[0, 1)`.
    pub fn tabulated(points: &[(T, T)]) -> Result<Self> {
        let spline = MonotoneSpline::new(points)?;
        Ok(Self { eps: T::one() - spline.value(T::zero()), kind: LinkKind::Custom(spline) })
    }

    pub fn kind(&self) -> &LinkKind<T> {
        &self.kind
    }

    /// The regularity margin ε with `K ≤ 1 − ε` everywhere.
    pub fn epsilon(&self) -> T {
        self.eps
    }

    pub fn needs_size(&self) -> bool {
        matches!(self.kind, LinkKind::ScaledGraphon { .. })
    }

    /// Resolve into an evaluator. `n` is required exactly for the
    /// sparse-graphon family and ignored otherwise.
    pub fn kernel(&self, n: Option<usize>) -> Result<Kernel<'_, T>> {
        match (&self.kind, n) {
            (LinkKind::ScaledGraphon { base, p_s }, Some(n)) => {
                if n == 0 {
                    return domain("graph size must be positive");
                }
                let inner = base.kernel(None)?;
                let scale = T::count(n).powf(-*p_s);
                Ok(Kernel { shape: inner.shape, scale: inner.scale * scale })
            }
            (LinkKind::ScaledGraphon { .. }, None) => {
                usage("the sparse-graphon link needs the graph size n")
            }
            (LinkKind::Polynomial { c, a }, _) => {
                let ai = integer_exponent(*a);
                Ok(Kernel { shape: Shape::Poly { c: *c, a: *a, ai }, scale: T::one() })
            }
            (LinkKind::LogisticExp { tau }, _) => {
                Ok(Kernel { shape: Shape::LogExp { tau: *tau }, scale: T::one() })
            }
            (LinkKind::Custom(s), _) => Ok(Kernel { shape: Shape::Table(s), scale: T::one() }),
        }
    }

    pub fn eval(&self, delta: T, n: Option<usize>) -> Result<T> {
        check_delta(delta)?;
        Ok(self.kernel(n)?.value(delta))
    }

    pub fn deriv(&self, delta: T, n: Option<usize>) -> Result<T> {
        check_delta(delta)?;
        Ok(self.kernel(n)?.deriv(delta))
    }

    pub fn inverse(&self, prob: T, n: Option<usize>) -> Result<T> {
        self.kernel(n)?.inverse(prob)
    }
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta >= T::zero() && delta.is_finite() {
        Ok(())
    } else {
        domain(format!("distance must be finite and non-negative, got {delta}"))
    }
}

fn integer_exponent<T: Real>(a: T) -> Option<i32> {
    let r = a.round();
    (r == a && a <= T::lit(16.0)).then(|| r.as_f64() as i32)
}

#[derive(Clone, Copy, Debug)]
enum Shape<'a, T: Real> {
    Poly { c: T, a: T, ai: Option<i32> },
    LogExp { tau: T },
    Table(&'a MonotoneSpline<T>),
}

/// A resolved link `δ ↦ min(s·K(δ), 1)` with `s` fixed.
#[derive(Clone, Copy, Debug)]
pub struct Kernel<'a, T: Real> {
    shape: Shape<'a, T>,
    scale: T,
}

impl<'a, T: Real> Kernel<'a, T> {
    #[inline]
    fn base_value(&self, delta: T) -> T {
        match self.shape {
            Shape::Poly { c, a, ai } => {
                let da = match ai {
                    Some(k) => delta.powi(k),
                    None => delta.powf(a),
                };
                T::one() / (c + da)
            }
            Shape::LogExp { tau } => {
                let e = (-delta).exp();
                e / (e + tau)
            }
            Shape::Table(s) => s.value(delta),
        }
    }

    #[inline]
    fn base_value_and_deriv(&self, delta: T) -> (T, T) {
        match self.shape {
            Shape::Poly { c, a, ai } => {
                let (da, da1) = match ai {
                    Some(k) => (delta.powi(k), delta.powi(k - 1)),
                    None => (delta.powf(a), delta.powf(a - T::one())),
                };
                let k = T::one() / (c + da);
                (k, -a * da1 * k * k)
            }
            Shape::LogExp { tau } => {
                let e = (-delta).exp();
                let k = e / (e + tau);
                (k, -k * (T::one() - k))
            }
            Shape::Table(s) => (s.value(delta), s.deriv(delta)),
        }
    }

    /// Link value at distance `delta ≥ 0`.
    #[inline]
    pub fn value(&self, delta: T) -> T {
        let v = self.scale * self.base_value(delta);
        if v > T::one() {
            T::one()
        } else {
            v
        }
    }

    #[inline]
    pub fn deriv(&self, delta: T) -> T {
        self.value_and_deriv(delta).1
    }

    /// `(K(δ), K'(δ))` in one evaluation.
    #[inline]
    pub fn value_and_deriv(&self, delta: T) -> (T, T) {
        let (k, dk) = self.base_value_and_deriv(delta);
        let v = self.scale * k;
        if v > T::one() {
            (T::one(), T::zero())
        } else {
            (v, self.scale * dk)
        }
    }

    /// `lim_{δ→0+} K'(δ)/δ` when finite. `None` means the pair gradient has
    /// no well-defined value at coincident points.
    pub fn deriv_over_delta_at_zero(&self) -> Option<T> {
        match self.shape {
            Shape::Poly { c, a, .. } => {
                let two = T::lit(2.0);
                if a > two {
                    Some(T::zero())
                } else if a == two {
                    Some(-self.scale * two / (c * c))
                } else {
                    None
                }
            }
            Shape::LogExp { .. } => None,
            Shape::Table(s) => s.second_deriv_at_zero_if_flat().map(|v| self.scale * v),
        }
    }

    /// Largest attainable value, `K(0)`.
    pub fn max_value(&self) -> T {
        self.value(T::zero())
    }

    pub fn inverse(&self, prob: T) -> Result<T> {
        let top = self.max_value();
        if !(prob > T::zero() && prob <= top) {
            return domain(format!("probability {prob} outside (0, K(0)] = (0, {top}]"));
        }
        let q = prob / self.scale;
        let delta = match self.shape {
            Shape::Poly { c, a, .. } => {
                let base = (T::one() / q - c).max(T::zero());
                base.powf(T::one() / a)
            }
            Shape::LogExp { tau } => ((T::one() / q - T::one()) / tau).ln().max(T::zero()),
            Shape::Table(s) => s.inverse(q)?,
        };
        Ok(delta)
    }
}

impl<T: Real> fmt::Display for LinkFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LinkKind::Polynomial { c, a } => write!(f, "poly:C={c},a={a}"),
            LinkKind::LogisticExp { tau } => write!(f, "logexp:tau={tau}"),
            LinkKind::ScaledGraphon { base, p_s } => write!(f, "sgraphon:p={p_s};{base}"),
            LinkKind::Custom(s) => {
                write!(f, "table:")?;
                for (i, (x, y)) in s.knots().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}/{y}")?;
                }
                Ok(())
            }
        }
    }
}

fn bad(input: &str, reason: impl Into<String>) -> Error {
    Error::Descriptor { input: input.to_string(), reason: reason.into() }
}

fn parse_params<'s>(input: &str, body: &'s str) -> Result<Vec<(&'s str, f64)>> {
    body.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(input, format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| bad(input, format!("`{v}` is not a number")))?;
            Ok((k.trim(), v))
        })
        .collect()
}

fn take(input: &str, params: &[(&str, f64)], key: &str) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| bad(input, format!("missing parameter `{key}`")))
}

fn only(input: &str, params: &[(&str, f64)], keys: &[&str]) -> Result<()> {
    match params.iter().find(|(k, _)| !keys.contains(k)) {
        Some((k, _)) => Err(bad(input, format!("unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

impl<T: Real> FromStr for LinkFunction<T> {
    type Err = Error;

    /// Parses `poly:C=2,a=3`, `logexp:tau=1`, `sgraphon:p=0.5;logexp:tau=1`
    /// and `table:0/0.5,1/0.25,2/0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = s.split_once(':').ok_or_else(|| bad(s, "missing `kind:` prefix"))?;
        let wrap = |e: Error| match e {
            Error::Domain(r) => bad(s, r),
            other => other,
        };
        match head {
            "poly" => {
                let ps = parse_params(s, body)?;
                only(s, &ps, &["C", "a"])?;
                Self::polynomial(T::lit(take(s, &ps, "C")?), T::lit(take(s, &ps, "a")?)).map_err(wrap)
            }
            "logexp" => {
                let ps = parse_params(s, body)?;
                only(s, &ps, &["tau"])?;
                Self::logistic_exp(T::lit(take(s, &ps, "tau")?)).map_err(wrap)
            }
            "sgraphon" => {
                let (own, rest) = body.split_once(';').ok_or_else(|| bad(s, "expected `p=..;<base>`"))?;
                let ps = parse_params(s, own)?;
                only(s, &ps, &["p"])?;
                let base: LinkFunction<T> = rest.parse()?;
                Self::scaled_graphon(base, T::lit(take(s, &ps, "p")?)).map_err(wrap)
            }
            "table" => {
                let pts = body
                    .split(',')
                    .map(|pair| {
                        let (x, y) = pair.split_once('/').ok_or_else(|| bad(s, format!("expected x/y, got `{pair}`")))?;
                        let x: f64 = x.trim().parse().map_err(|_| bad(s, format!("`{x}` is not a number")))?;
                        let y: f64 = y.trim().parse().map_err(|_| bad(s, format!("`{y}` is not a number")))?;
                        Ok((T::lit(x), T::lit(y)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::tabulated(&pts).map_err(wrap)
            }
            other => Err(bad(s, format!("unknown link kind `{other}`"))),
        }
    }
}
