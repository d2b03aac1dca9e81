//! Restricted maximum likelihood: maximise the log-likelihood over
//! configurations whose rows lie in the ball of radius `G`.
//!
//! The optimiser is projected gradient ascent. Each iteration tries a
//! Barzilai–Borwein step, backtracks until the Armijo condition holds and
//! projects onto the ball. It stops once the gradient restricted to the
//! tangent cone of the constraint set falls below `grad_tol` in max-norm.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::classical_mds;
use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood, log_likelihood_gradient, GradientEval};
use crate::model::LinkFunction;
use crate::sampler::Adjacency;
use crate::seed::{derive, rng_from, tag};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepConfig {
    pub initial: f64,
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_increase: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { initial: 1.0, shrink: 0.5, sufficient_increase: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Mds,
    Random,
    /// Start from [`FitConfig::start`].
    Provided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step: StepConfig,
    pub restarts: usize,
    /// Initialisation of the first restart; later restarts start at random.
    pub init: Init,
    /// Floor on surrogate probabilities in the MDS initialisation.
    pub eps_k: f64,
    /// Shrinkage of edge indicators towards 1/2 in the MDS initialisation.
    pub eta: f64,
    pub seed: u64,
    #[serde(skip)]
    pub start: Option<DMatrix<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-6,
            step: StepConfig::default(),
            restarts: 5,
            init: Init::Mds,
            eps_k: 1e-3,
            eta: 0.05,
            seed: 0,
            start: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.step;
        let checks = [
            (self.restarts >= 1, "restarts must be at least 1"),
            (self.grad_tol > 0.0, "grad_tol must be positive"),
            (s.initial > 0.0, "initial step must be positive"),
            (s.shrink > 0.0 && s.shrink < 1.0, "step shrink must lie in (0,1)"),
            (s.sufficient_increase > 0.0 && s.sufficient_increase < 1.0, "sufficient increase must lie in (0,1)"),
            (self.eps_k > 0.0 && self.eps_k < 1.0, "eps_k must lie in (0,1)"),
            (self.eta > 0.0 && self.eta < 0.5, "eta must lie in (0,1/2)"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Usage(msg.into()));
            }
        }
        if self.init == Init::Provided && self.start.is_none() {
            return Err(Error::Usage("init = provided needs a starting configuration".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T: Real> {
    pub z_hat: DMatrix<T>,
    pub loglik: T,
    /// Log-likelihood after every accepted step of the selected restart,
    /// starting with the initial value.
    pub trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Restarts attempted, including failed ones.
    pub restarts_used: usize,
    /// Index of the selected restart.
    pub best_restart: usize,
    pub wallclock: Duration,
}

/// Rescale rows with norm above `g` onto the sphere of radius `g`.
pub fn project_ball<T: Real>(z: &DMatrix<T>, g: T) -> DMatrix<T> {
    let mut out = z.clone();
    project_in_place(&mut out, g);
    out
}

fn project_in_place<T: Real>(z: &mut DMatrix<T>, g: T) {
    for i in 0..z.nrows() {
        let norm = z.row(i).norm();
        if norm > g {
            let s = g / norm;
            z.row_mut(i).scale_mut(s);
        }
    }
}

fn random_ball<T: Real, R: Rng + ?Sized>(n: usize, d: usize, g: T, rng: &mut R) -> DMatrix<T> {
    let mut z = DMatrix::zeros(n, d);
    for i in 0..n {
        let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let radius = g.as_f64() * rng.random::<f64>().powf(1.0 / d as f64);
        for k in 0..d {
            z[(i, k)] = T::lit(if norm > 0.0 { dir[k] / norm * radius } else { 0.0 });
        }
    }
    project_in_place(&mut z, g);
    z
}

/// Starting configuration for the fitter, always inside the `G`-ball.
pub fn initialize<T: Real, R: Rng + ?Sized>(
    y: &Adjacency,
    link: &LinkFunction<T>,
    d: usize,
    strategy: Init,
    g: T,
    cfg: &FitConfig,
    rng: &mut R,
) -> Result<DMatrix<T>> {
    let n = y.len();
    if d == 0 || n == 0 {
        return Err(Error::Usage("need n ≥ 1 and d ≥ 1".into()));
    }
    if !(g > T::zero()) {
        return Err(Error::Domain(format!("ball radius must be positive, got {g}")));
    }
    match strategy {
        Init::Random => Ok(random_ball(n, d, g, rng)),
        Init::Provided => {
            let s = cfg.start.as_ref().ok_or_else(|| Error::Usage("no starting configuration supplied".into()))?;
            if s.shape() != (n, d) {
                return Err(Error::Usage(format!("starting configuration is {:?}, expected ({n}, {d})", s.shape())));
            }
            Ok(project_ball(&s.map(T::lit), g))
        }
        Init::Mds => {
            let kernel = link.kernel(Some(n))?;
            let top = kernel.max_value();
            let eta = T::lit(cfg.eta);
            let floor = T::lit(cfg.eps_k);
            let far = T::lit(2.0) * g;
            let surrogate = |edge: bool| -> T {
                let raw = if edge { T::one() - eta } else { eta };
                let p = raw.max(floor).min(top);
                kernel.inverse(p).map(|x| x.min(far)).unwrap_or(far)
            };
            let (d_edge, d_non) = (surrogate(true), surrogate(false));
            let dsq = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    T::zero()
                } else {
                    let x = if y.get(i, j) { d_edge } else { d_non };
                    x * x
                }
            });
            // Surrogate distances need not be Euclidean; a failed embedding
            // falls back to a random start.
            match classical_mds(&dsq, d) {
                Ok(z) => Ok(project_ball(&z, g)),
                Err(Error::NonEuclidean(_)) => Ok(random_ball(n, d, g, rng)),
                Err(e) => Err(e),
            }
        }
    }
}

/// Max-norm of the gradient after removing outward radial components at
/// rows on the boundary of the ball.
fn projected_grad_norm<T: Real>(z: &DMatrix<T>, grad: &DMatrix<T>, g: T) -> T {
    let edge = g * (T::one() - T::lit(1e-10));
    let mut worst = T::zero();
    for i in 0..z.nrows() {
        let zi = z.row(i);
        let gi = grad.row(i);
        let r = zi.norm();
        let radial = if r > T::zero() { gi.dot(&zi) / r } else { T::zero() };
        let m = if r >= edge && radial > T::zero() {
            let tangent = gi - zi * (radial / r);
            tangent.amax()
        } else {
            gi.amax()
        };
        worst = worst.max(m);
    }
    worst
}

struct Ascent<T: Real> {
    z: DMatrix<T>,
    trace: Vec<T>,
    iterations: usize,
    converged: bool,
}

fn ascend<T: Real>(
    y: &Adjacency,
    link: &LinkFunction<T>,
    g: T,
    cfg: &FitConfig,
    start: DMatrix<T>,
) -> Result<Option<Ascent<T>>> {
    let mut z = project_ball(&start, g);
    let mut cur: GradientEval<T> = log_likelihood_gradient(&z, y, link)?;
    if cur.degenerate {
        return Ok(None);
    }
    let (shrink, c1) = (T::lit(cfg.step.shrink), T::lit(cfg.step.sufficient_increase));
    let tol = T::lit(cfg.grad_tol);
    let min_step = T::lit(1e-30);
    let mut trace = vec![cur.value];
    let mut trial = T::lit(cfg.step.initial);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        if projected_grad_norm(&z, &cur.gradient, g) < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut alpha = trial;
        let accepted = loop {
            let mut cand = &z + &cur.gradient * alpha;
            project_in_place(&mut cand, g);
            let s = &cand - &z;
            let ev = log_likelihood_gradient(&cand, y, link)?;
            let gain = cur.gradient.dot(&s);
            if !ev.degenerate && ev.value >= cur.value + c1 * gain {
                break Some((cand, s, ev));
            }
            alpha *= shrink;
            if alpha < min_step || s.amax() == T::zero() {
                break None;
            }
        };
        let Some((cand, s, ev)) = accepted else {
            // No ascent direction left at working precision.
            break;
        };
        let yv = &ev.gradient - &cur.gradient;
        let curv = -s.dot(&yv);
        trial = if curv > T::zero() { s.norm_squared() / curv } else { alpha / shrink };
        z = cand;
        cur = ev;
        trace.push(cur.value);
    }
    if !converged && projected_grad_norm(&z, &cur.gradient, g) < tol {
        converged = true;
    }
    Ok(Some(Ascent { z, trace, iterations, converged }))
}

/// Best-of-restarts restricted MLE in dimension `d` with ball radius `g`.
pub fn fit_restricted_mle<T: Real>(
    y: &Adjacency,
    link: &LinkFunction<T>,
    d: usize,
    g: T,
    cfg: &FitConfig,
) -> Result<FitResult<T>> {
    cfg.validate()?;
    let clock = Instant::now();
    let run = |k: usize| -> Result<Option<Ascent<T>>> {
        let mut rng = rng_from(derive(cfg.seed, &[tag::RESTART, k as u64]));
        let strategy = if k == 0 { cfg.init } else { Init::Random };
        let start = initialize(y, link, d, strategy, g, cfg, &mut rng)?;
        ascend(y, link, g, cfg, start)
    };
    let runs: Vec<Result<Option<Ascent<T>>>> = (0..cfg.restarts).into_par_iter().map(run).collect();
    let mut best: Option<(usize, Ascent<T>)> = None;
    for (k, r) in runs.into_iter().enumerate() {
        let Some(a) = r? else { continue };
        let better = match &best {
            None => true,
            Some((_, b)) => a.trace.last() > b.trace.last(),
        };
        if better {
            best = Some((k, a));
        }
    }
    let (k, a) = best.ok_or_else(|| Error::FitFailed(format!("all {} restarts had a non-finite likelihood", cfg.restarts)))?;
    Ok(FitResult {
        loglik: *a.trace.last().expect("trace holds the initial value"),
        z_hat: a.z,
        trace: a.trace,
        iterations: a.iterations,
        converged: a.converged,
        restarts_used: cfg.restarts,
        best_restart: k,
        wallclock: clock.elapsed(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T: Real> {
    pub z_star: DMatrix<T>,
    pub loglik_star: T,
    pub evaluations: u64,
}

/// Largest grid the oracle will enumerate.
pub const ORACLE_MAX_EVALUATIONS: f64 = 1e8;

/// Exhaustive search over one-dimensional grid configurations in `[−G, G]`.
///
/// Translation is fixed by pinning the leftmost node at `−G`; every
/// feasible configuration has a translate of that form, so the search
/// covers the whole constraint set at the grid resolution.
pub fn grid_search_oracle<T: Real>(
    y: &Adjacency,
    link: &LinkFunction<T>,
    d: usize,
    g: T,
    resolution: T,
) -> Result<OracleResult<T>> {
    let n = y.len();
    if d != 1 || n == 0 || n > 4 {
        return Err(Error::Usage(format!("grid oracle supports d = 1 and 1 ≤ n ≤ 4, got d = {d}, n = {n}")));
    }
    if !(g > T::zero()) || !(resolution > T::zero()) {
        return Err(Error::Domain("grid oracle needs G > 0 and resolution > 0".into()));
    }
    let steps = ((T::lit(2.0) * g) / resolution).as_f64();
    let m = steps.floor() as usize + 1;
    let evaluations = n as f64 * (m as f64).powi(n as i32 - 1);
    if evaluations > ORACLE_MAX_EVALUATIONS {
        return Err(Error::Usage(format!("grid oracle would need {evaluations:.3e} evaluations")));
    }
    let kernel = link.kernel(Some(n))?;
    let lo = T::lit(1e-12);
    let hi = T::one() - lo.max(<T as Real>::epsilon());
    let log_or_neg = |p: T| if p <= T::zero() { T::neg_infinity() } else { p.max(lo).min(hi).ln() };
    // Pair log-terms by grid offset.
    let (on, off): (Vec<T>, Vec<T>) = (0..m)
        .map(|k| {
            let p = kernel.value(T::count(k) * resolution);
            let on = log_or_neg(p);
            let off = if p >= T::one() { T::neg_infinity() } else { (T::one() - p.max(lo).min(hi)).ln() };
            (on, off)
        })
        .unzip();
    let mut best = (T::neg_infinity(), vec![0usize; n]);
    let mut idx = vec![0usize; n];
    for pinned in 0..n {
        let free: Vec<usize> = (0..n).filter(|&i| i != pinned).collect();
        let total = m.pow(free.len() as u32);
        for code in 0..total {
            let mut c = code;
            idx[pinned] = 0;
            for &i in &free {
                idx[i] = c % m;
                c /= m;
            }
            let mut v = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    let k = idx[i].abs_diff(idx[j]);
                    v += if y.get(i, j) { on[k] } else { off[k] };
                }
            }
            if v > best.0 {
                best = (v, idx.clone());
            }
        }
    }
    let z_star = DMatrix::from_fn(n, 1, |i, _| -g + T::count(best.1[i]) * resolution);
    let loglik_star = log_likelihood(&z_star, y, link)?.value;
    Ok(OracleResult { z_star, loglik_star, evaluations: evaluations as u64 })
}
