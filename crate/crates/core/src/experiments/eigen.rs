use rayon::prelude::*;
use serde::Serialize;

use super::{replicate_seed, Cell, ExperimentPlan, ExperimentReport, PlotPoint};
use crate::embedding::top_eigenvalues;
use crate::error::Result;
use crate::sampler::{config_seed, ModelSpec};
use crate::seed::rng_from;
use crate::stats::{coefficient_of_variation, mean};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenPoint {
    pub n: usize,
    /// Normaliser: `n·g(n)²` (rectangular) or `n·σ²` (Gaussian).
    pub scale: f64,
    /// Mean of `λ_i / scale` over replicates, one entry per dimension.
    pub mean_scaled: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSummary {
    pub model: String,
    pub points: Vec<EigenPoint>,
    /// Coefficient of variation of the per-n means across the grid, per
    /// dimension.
    pub cv: Vec<f64>,
    /// Grand mean of the scaled eigenvalues, one entry per dimension.
    pub constant: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenRow {
    pub model: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub lambda: Vec<f64>,
    pub scaled: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOutcome {
    pub summaries: Vec<EigenSummary>,
    pub rows: Vec<EigenRow>,
}

fn normaliser(model: &ModelSpec<f64>, n: usize) -> f64 {
    match (model.window(), model.sigma2()) {
        (Some(w), _) => {
            let g = w.halfwidth(n as f64);
            n as f64 * g * g
        }
        (None, Some(s2)) => n as f64 * s2,
        (None, None) => unreachable!("every model has a window or a variance"),
    }
}

/// Eigenvalues of the centred Gram matrix `C·Z·Zᵀ·C`, scaled by their
/// predicted growth.
pub fn run_eigenvalue_experiment(plan: &ExperimentPlan) -> Result<EigenOutcome> {
    plan.validate()?;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (mi, (label, model, _link)) in plan.resolved()?.into_iter().enumerate() {
        let d = model.dim();
        let mut points = Vec::new();
        for &n in &plan.n_grid {
            let scale = normaliser(&model, n);
            let reps: Vec<EigenRow> = (0..plan.replicates)
                .into_par_iter()
                .map(|r| {
                    let seed = replicate_seed(plan.seed, n, r);
                    let config = model.sample_config(n, &mut rng_from(config_seed(seed)))?;
                    let lambda = top_eigenvalues(config.positions());
                    let scaled = lambda.iter().map(|l| l / scale).collect();
                    Ok(EigenRow { model: mi, n, replicate: r, seed, lambda, scaled })
                })
                .collect::<Result<_>>()?;
            let mean_scaled = (0..d).map(|k| mean(&reps.iter().map(|r| r.scaled[k]).collect::<Vec<_>>())).collect();
            points.push(EigenPoint { n, scale, mean_scaled });
            rows.extend(reps);
        }
        let per_dim = |k: usize| points.iter().map(|p| p.mean_scaled[k]).collect::<Vec<_>>();
        summaries.push(EigenSummary {
            model: label,
            cv: (0..d).map(|k| coefficient_of_variation(&per_dim(k))).collect(),
            constant: (0..d).map(|k| mean(&per_dim(k))).collect(),
            points,
        });
    }
    Ok(EigenOutcome { summaries, rows })
}

impl EigenOutcome {
    pub fn report(&self, plan: &ExperimentPlan) -> Result<ExperimentReport> {
        let mut rows = Vec::new();
        for r in &self.rows {
            for (k, (l, s)) in r.lambda.iter().zip(&r.scaled).enumerate() {
                rows.push(vec![
                    Cell::from(self.summaries[r.model].model.as_str()),
                    r.n.into(),
                    r.replicate.into(),
                    r.seed.into(),
                    (k + 1).into(),
                    (*l).into(),
                    (*s).into(),
                ]);
            }
        }
        let mut plot = Vec::new();
        for s in &self.summaries {
            for p in &s.points {
                for (k, &y) in p.mean_scaled.iter().enumerate() {
                    plot.push(PlotPoint { x: p.n as f64, y, series: format!("{} lambda{}", s.model, k + 1) });
                }
            }
        }
        ExperimentReport::new(plan, vec!["model", "n", "replicate", "seed", "index", "lambda", "scaled"], rows, &self.summaries, plot)
    }
}
