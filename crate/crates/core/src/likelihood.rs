//! Graph log-likelihood of latent positions, its gradient, and the matrix
//! divergences used to score recovered configurations.
//!
//! Sums run over unordered dyads `i < j`. Divergences are doubled so they
//! match the ordered double sum with a zero diagonal.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::embedding::procrustes_align;
use crate::error::{Error, Result};
use crate::model::{Kernel, LinkFunction};
use crate::sampler::Adjacency;
use crate::scalar::CompensatedSum;
use crate::Real;

/// Below this size pair loops stay on the calling thread.
const PAR_MIN_N: usize = 96;

/// `D_ij = ‖z^i − z^j‖²`.
pub fn squared_distances<T: Real>(z: &DMatrix<T>) -> DMatrix<T> {
    let n = z.nrows();
    let rows = row_major(z);
    let d = z.ncols();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(&rows[i * d..(i + 1) * d], &rows[j * d..(j + 1) * d]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// `P_ij = K(√D_ij)` off the diagonal, 0 on it. Size-dependent links are
/// evaluated at `n = D.nrows()`.
pub fn link_matrix<T: Real>(link: &LinkFunction<T>, d_sq: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = d_sq.nrows();
    let k = link.kernel(Some(n.max(1)))?;
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j { T::zero() } else { k.value(d_sq[(i, j)].max(T::zero()).sqrt()) }))
}

fn row_major<T: Real>(z: &DMatrix<T>) -> Vec<T> {
    let mut v = Vec::with_capacity(z.len());
    for i in 0..z.nrows() {
        v.extend(z.row(i).iter().copied());
    }
    v
}

#[inline]
fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        let t = *x - *y;
        s += t * t;
    }
    s
}

/// Log-likelihood value with a flag for impossible observations (an edge
/// where `K = 0`, or a non-edge where `K = 1`), which make it `−∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLikelihood<T: Real> {
    pub value: T,
    pub degenerate: bool,
}

/// Log-likelihood and its gradient in the positions.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientEval<T: Real> {
    pub value: T,
    pub gradient: DMatrix<T>,
    /// Value or gradient is not finite.
    pub degenerate: bool,
    /// Coincident pairs whose gradient term was dropped because `K'(δ)/δ`
    /// has no finite limit at 0.
    pub skipped: usize,
}

#[derive(Clone, Copy)]
struct Clamp<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Clamp<T> {
    fn new() -> Self {
        let lo = T::lit(1e-12);
        let hi = T::one() - lo.max(T::epsilon());
        Self { lo, hi }
    }

    #[inline]
    fn apply(&self, k: T) -> T {
        k.max(self.lo).min(self.hi)
    }

    /// Log-probability of the observed dyad state.
    #[inline]
    fn term(&self, k: T, edge: bool) -> (T, bool) {
        if edge {
            if k <= T::zero() {
                return (T::neg_infinity(), true);
            }
            (self.apply(k).ln(), false)
        } else {
            if k >= T::one() {
                return (T::neg_infinity(), true);
            }
            ((T::one() - self.apply(k)).ln(), false)
        }
    }
}

fn check_dims<T: Real>(z: &DMatrix<T>, y: &Adjacency) -> Result<()> {
    if z.nrows() != y.len() {
        return Err(Error::Usage(format!("{} positions for a {}-node graph", z.nrows(), y.len())));
    }
    Ok(())
}

struct RowPass<T: Real> {
    loglik: CompensatedSum<T>,
    degenerate: bool,
    skipped: usize,
    /// `w_ij` for `j > i`.
    weights: Vec<T>,
}

fn row_pass<T: Real>(
    i: usize,
    rows: &[T],
    d: usize,
    y: &Adjacency,
    kernel: &Kernel<'_, T>,
    clamp: Clamp<T>,
    with_grad: bool,
    zero_limit: Option<T>,
) -> RowPass<T> {
    let n = y.len();
    let zi = &rows[i * d..(i + 1) * d];
    let adj = y.row(i);
    let mut out = RowPass {
        loglik: CompensatedSum::new(),
        degenerate: false,
        skipped: 0,
        weights: if with_grad { Vec::with_capacity(n - i - 1) } else { Vec::new() },
    };
    for j in (i + 1)..n {
        let edge = adj[j] != 0;
        let dsq = sq_dist(zi, &rows[j * d..(j + 1) * d]);
        let delta = dsq.sqrt();
        if !with_grad {
            let (t, bad) = clamp.term(kernel.value(delta), edge);
            out.loglik.add(t);
            out.degenerate |= bad;
            continue;
        }
        let (k, dk) = kernel.value_and_deriv(delta);
        let (t, bad) = clamp.term(k, edge);
        out.loglik.add(t);
        out.degenerate |= bad;
        // dℓ/dδ times 1/δ; the direction (z^i − z^j) is applied later.
        let w = if delta > T::zero() {
            let kc = clamp.apply(k);
            let dl = if edge { dk / kc } else { -dk / (T::one() - kc) };
            dl / delta
        } else {
            // The pair term is w·(z^i − z^j) = 0 whenever the limit is finite.
            if zero_limit.is_none() {
                out.skipped += 1;
            }
            T::zero()
        };
        out.weights.push(w);
    }
    out
}

fn passes<T: Real>(z: &DMatrix<T>, y: &Adjacency, link: &LinkFunction<T>, with_grad: bool) -> Result<(Vec<T>, Vec<RowPass<T>>)> {
    check_dims(z, y)?;
    let n = y.len();
    let d = z.ncols();
    let kernel = link.kernel(Some(n.max(1)))?;
    let clamp = Clamp::new();
    let zero_limit = kernel.deriv_over_delta_at_zero();
    let rows = row_major(z);
    let pass = |i| row_pass(i, &rows, d, y, &kernel, clamp, with_grad, zero_limit);
    let out: Vec<RowPass<T>> = if n >= PAR_MIN_N {
        (0..n).into_par_iter().map(pass).collect()
    } else {
        (0..n).map(pass).collect()
    };
    Ok((rows, out))
}

fn total<T: Real>(rows: &[RowPass<T>]) -> (T, bool) {
    let mut s = CompensatedSum::new();
    let mut bad = false;
    for r in rows {
        s.add(r.loglik.value());
        bad |= r.degenerate;
    }
    let v = if bad { T::neg_infinity() } else { s.value() };
    (v, bad)
}

/// `Σ_{i<j} [Y_ij log K(δ_ij) + (1 − Y_ij) log(1 − K(δ_ij))]`, with
/// probabilities clamped to `[1e-12, 1 − 1e-12]` inside the logs.
pub fn log_likelihood<T: Real>(z: &DMatrix<T>, y: &Adjacency, link: &LinkFunction<T>) -> Result<LogLikelihood<T>> {
    let (_, rows) = passes(z, y, link, false)?;
    let (value, degenerate) = total(&rows);
    Ok(LogLikelihood { value, degenerate })
}

/// Log-likelihood together with its exact gradient. Row `i` of the
/// gradient is `Σ_{j≠i} w_ij (z^i − z^j)`.
pub fn log_likelihood_gradient<T: Real>(
    z: &DMatrix<T>,
    y: &Adjacency,
    link: &LinkFunction<T>,
) -> Result<GradientEval<T>> {
    let (rows, pass) = passes(z, y, link, true)?;
    let n = y.len();
    let d = z.ncols();
    let (value, mut degenerate) = total(&pass);
    let skipped = pass.iter().map(|p| p.skipped).sum();
    let grad_row = |i: usize| -> Vec<T> {
        let zi = &rows[i * d..(i + 1) * d];
        let mut g = vec![T::zero(); d];
        for j in 0..n {
            if j == i {
                continue;
            }
            let w = if j > i { pass[i].weights[j - i - 1] } else { pass[j].weights[i - j - 1] };
            if w == T::zero() {
                continue;
            }
            let zj = &rows[j * d..(j + 1) * d];
            for k in 0..d {
                g[k] += w * (zi[k] - zj[k]);
            }
        }
        g
    };
    let grows: Vec<Vec<T>> = if n >= PAR_MIN_N {
        (0..n).into_par_iter().map(grad_row).collect()
    } else {
        (0..n).map(grad_row).collect()
    };
    let gradient = DMatrix::from_fn(n, d, |i, k| grows[i][k]);
    degenerate |= !value.is_finite() || gradient.iter().any(|g| !g.is_finite());
    Ok(GradientEval { value, gradient, degenerate, skipped })
}

fn check_pair<T: Real>(p: &DMatrix<T>, q: &DMatrix<T>) -> Result<()> {
    if p.shape() != q.shape() || p.nrows() != p.ncols() {
        return Err(Error::Usage(format!("need equal square matrices, got {:?} and {:?}", p.shape(), q.shape())));
    }
    Ok(())
}

#[inline]
fn xlogx_over<T: Real>(x: T, y: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if y <= T::zero() {
        T::infinity()
    } else {
        x * (x / y).ln()
    }
}

/// Bernoulli KL divergence summed over dyads, doubled. Infinite when `Q`
/// puts zero mass where `P` does not.
pub fn kl_divergence<T: Real>(p: &DMatrix<T>, q: &DMatrix<T>) -> Result<T> {
    check_pair(p, q)?;
    let n = p.nrows();
    let mut s = CompensatedSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (p[(i, j)], q[(i, j)]);
            let t = xlogx_over(a, b) + xlogx_over(T::one() - a, T::one() - b);
            if !t.is_finite() {
                return Ok(T::infinity());
            }
            s.add(t);
        }
    }
    Ok(T::lit(2.0) * s.value())
}

/// Squared Hellinger distance between the Bernoulli dyad laws, doubled.
pub fn hellinger_sq<T: Real>(p: &DMatrix<T>, q: &DMatrix<T>) -> Result<T> {
    check_pair(p, q)?;
    let n = p.nrows();
    let mut s = CompensatedSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (p[(i, j)], q[(i, j)]);
            let u = a.sqrt() - b.sqrt();
            let v = (T::one() - a).sqrt() - (T::one() - b).sqrt();
            s.add(u * u + v * v);
        }
    }
    Ok(T::lit(2.0) * s.value())
}

/// `‖P − Q‖²_F` over the full matrix.
pub fn frobenius_sq<T: Real>(p: &DMatrix<T>, q: &DMatrix<T>) -> Result<T> {
    check_pair(p, q)?;
    Ok(p.iter().zip(q.iter()).map(|(a, b)| (*a - *b) * (*a - *b)).collect::<CompensatedSum<T>>().value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnabilityErrors<T: Real> {
    /// `inf_{T,Q} ‖Ẑ·T − Q − Z‖²_F / n`.
    pub pos_err: T,
    /// `‖D^Ẑ − D^Z‖²_F / n²`.
    pub dist_err: T,
    /// `‖P^Ẑ − P^Z‖²_F / e(n)`.
    pub prob_err: T,
}

pub fn learnability_errors<T: Real>(
    z_hat: &DMatrix<T>,
    z: &DMatrix<T>,
    link: &LinkFunction<T>,
    e_n: T,
) -> Result<LearnabilityErrors<T>> {
    if z_hat.shape() != z.shape() {
        return Err(Error::Usage(format!("shape mismatch: {:?} vs {:?}", z_hat.shape(), z.shape())));
    }
    if !(e_n > T::zero()) {
        return Err(Error::Domain(format!("edge scale must be positive, got {e_n}")));
    }
    let n = T::count(z.nrows().max(1));
    let pos_err = procrustes_align(z_hat, z)?.error / n;
    let (dh, dz) = (squared_distances(z_hat), squared_distances(z));
    let dist_err = frobenius_sq(&dh, &dz)? / (n * n);
    let prob_err = frobenius_sq(&link_matrix(link, &dh)?, &link_matrix(link, &dz)?)? / e_n;
    Ok(LearnabilityErrors { pos_err, dist_err, prob_err })
}
