use rayon::prelude::*;
use serde::Serialize;

use super::{fit_log_log_slope, non_increasing, replicate_seed, Cell, ExperimentPlan, ExperimentReport, PlotPoint};
use crate::error::Result;
use crate::estimator::{fit_restricted_mle, FitConfig};
use crate::likelihood::learnability_errors;
use crate::sampler::{generate, EdgeOptions};
use crate::stats::median;

/// Largest tolerated share of failed fits at any grid size.
const MAX_FAILURE_SHARE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnabilityPoint {
    pub n: usize,
    pub g: f64,
    pub e_n: f64,
    pub fits: usize,
    pub failures: usize,
    pub median_pos_err: f64,
    pub median_dist_err: f64,
    pub median_prob_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnabilitySummary {
    pub model: String,
    pub points: Vec<LearnabilityPoint>,
    pub pos_err_non_increasing: bool,
    pub dist_err_non_increasing: bool,
    pub prob_err_non_increasing: bool,
    pub pos_err_slope: Option<f64>,
    pub dist_err_slope: Option<f64>,
    pub prob_err_slope: Option<f64>,
    /// Set when more than 10% of the fits failed at some grid size.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnabilityRow {
    pub model: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub failed: bool,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub pos_err: f64,
    pub dist_err: f64,
    pub prob_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnabilityOutcome {
    pub summaries: Vec<LearnabilitySummary>,
    pub rows: Vec<LearnabilityRow>,
}

/// Fit the restricted MLE to graphs with known positions and track the
/// three error functionals along the grid.
pub fn run_learnability_experiment(plan: &ExperimentPlan) -> Result<LearnabilityOutcome> {
    plan.validate()?;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (mi, (label, model, link)) in plan.resolved()?.into_iter().enumerate() {
        let bound = model.regularity(plan.gaussian_c)?;
        let d = model.dim();
        let mut points = Vec::new();
        for &n in &plan.n_grid {
            let g = bound.at(n);
            let e_n = model.edge_scale(&link, n);
            let reps: Vec<LearnabilityRow> = (0..plan.replicates)
                .into_par_iter()
                .map(|r| {
                    let seed = replicate_seed(plan.seed, n, r);
                    let graph = generate(&model, &link, n, seed, EdgeOptions::default())?;
                    let cfg = FitConfig { seed, ..plan.fit.clone() };
                    let mut row = LearnabilityRow {
                        model: mi,
                        n,
                        replicate: r,
                        seed,
                        failed: true,
                        loglik: f64::NAN,
                        iterations: 0,
                        converged: false,
                        pos_err: f64::NAN,
                        dist_err: f64::NAN,
                        prob_err: f64::NAN,
                    };
                    let Ok(fit) = fit_restricted_mle(&graph.adjacency, &link, d, g, &cfg) else {
                        return Ok(row);
                    };
                    let e = learnability_errors(&fit.z_hat, graph.config.positions(), &link, e_n)?;
                    row.failed = false;
                    row.loglik = fit.loglik;
                    row.iterations = fit.iterations;
                    row.converged = fit.converged;
                    row.pos_err = e.pos_err;
                    row.dist_err = e.dist_err;
                    row.prob_err = e.prob_err;
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            let ok: Vec<&LearnabilityRow> = reps.iter().filter(|r| !r.failed).collect();
            let med = |f: fn(&LearnabilityRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    median(&ok.iter().map(|r| f(r)).collect::<Vec<_>>())
                }
            };
            points.push(LearnabilityPoint {
                n,
                g,
                e_n,
                fits: ok.len(),
                failures: reps.len() - ok.len(),
                median_pos_err: med(|r| r.pos_err),
                median_dist_err: med(|r| r.dist_err),
                median_prob_err: med(|r| r.prob_err),
            });
            rows.extend(reps);
        }
        let series = |f: fn(&LearnabilityPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
        let slope = |f: fn(&LearnabilityPoint) -> f64| {
            let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, f(p))).collect();
            fit_log_log_slope(&pts).ok().map(|s| s.slope)
        };
        let flagged = points.iter().any(|p| p.failures as f64 > MAX_FAILURE_SHARE * (p.fits + p.failures) as f64);
        summaries.push(LearnabilitySummary {
            model: label,
            pos_err_non_increasing: non_increasing(&series(|p| p.median_pos_err)),
            dist_err_non_increasing: non_increasing(&series(|p| p.median_dist_err)),
            prob_err_non_increasing: non_increasing(&series(|p| p.median_prob_err)),
            pos_err_slope: slope(|p| p.median_pos_err),
            dist_err_slope: slope(|p| p.median_dist_err),
            prob_err_slope: slope(|p| p.median_prob_err),
            flagged,
            points,
        });
    }
    Ok(LearnabilityOutcome { summaries, rows })
}

impl LearnabilityOutcome {
    pub fn report(&self, plan: &ExperimentPlan) -> Result<ExperimentReport> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::from(self.summaries[r.model].model.as_str()),
                    r.n.into(),
                    r.replicate.into(),
                    r.seed.into(),
                    r.failed.into(),
                    r.loglik.into(),
                    r.iterations.into(),
                    r.converged.into(),
                    r.pos_err.into(),
                    r.dist_err.into(),
                    r.prob_err.into(),
                ]
            })
            .collect();
        let mut plot = Vec::new();
        for s in &self.summaries {
            for p in &s.points {
                for (name, y) in [("pos_err", p.median_pos_err), ("dist_err", p.median_dist_err), ("prob_err", p.median_prob_err)] {
                    plot.push(PlotPoint { x: p.n as f64, y, series: format!("{} {name}", s.model) });
                }
            }
        }
        let columns = vec![
            "model", "n", "replicate", "seed", "failed", "loglik", "iterations", "converged", "pos_err", "dist_err", "prob_err",
        ];
        ExperimentReport::new(plan, columns, rows, &self.summaries, plot)
    }
}
