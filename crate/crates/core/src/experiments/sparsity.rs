use rayon::prelude::*;
use serde::Serialize;

use super::{fit_log_log_slope, replicate_seed, Cell, ExperimentPlan, ExperimentReport, PlotPoint};
use crate::error::Result;
use crate::sampler::{config_seed, count_edges, EdgeOptions};
use crate::seed::rng_from;
use crate::stats::mean;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridMean {
    pub n: usize,
    pub mean_edges: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsitySummary {
    pub model: String,
    /// Theoretical exponent `b` in `E[edges] = Θ(n^b)`.
    pub target: f64,
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    pub means: Vec<GridMean>,
    /// Grid points left out of the fit because no edges were seen.
    pub excluded: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsityRow {
    pub model: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsityOutcome {
    pub summaries: Vec<SparsitySummary>,
    pub rows: Vec<SparsityRow>,
}

/// Mean edge count per grid size and the log-log slope of the means.
pub fn run_sparsity_experiment(plan: &ExperimentPlan) -> Result<SparsityOutcome> {
    plan.validate()?;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (mi, (label, model, link)) in plan.resolved()?.into_iter().enumerate() {
        let mut means = Vec::new();
        let mut excluded = Vec::new();
        for &n in &plan.n_grid {
            let counts: Vec<SparsityRow> = (0..plan.replicates)
                .into_par_iter()
                .map(|r| {
                    let seed = replicate_seed(plan.seed, n, r);
                    let config = model.sample_config(n, &mut rng_from(config_seed(seed)))?;
                    let edges = count_edges(&config, &link, seed, EdgeOptions::default())?;
                    Ok(SparsityRow { model: mi, n, replicate: r, seed, edges })
                })
                .collect::<Result<_>>()?;
            let m = mean(&counts.iter().map(|c| c.edges as f64).collect::<Vec<_>>());
            if m > 0.0 {
                means.push(GridMean { n, mean_edges: m });
            } else {
                excluded.push(n);
            }
            rows.extend(counts);
        }
        let pts: Vec<(f64, f64)> = means.iter().map(|g| (g.n as f64, g.mean_edges)).collect();
        let fit = fit_log_log_slope(&pts).ok();
        summaries.push(SparsitySummary {
            model: label,
            target: model.sparsity_exponent(&link),
            slope: fit.map(|f| f.slope),
            stderr: fit.map(|f| f.stderr),
            means,
            excluded,
        });
    }
    Ok(SparsityOutcome { summaries, rows })
}

impl SparsityOutcome {
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
                    r.edges.into(),
                ]
            })
            .collect();
        let plot = self
            .summaries
            .iter()
            .flat_map(|s| s.means.iter().map(|g| PlotPoint { x: g.n as f64, y: g.mean_edges, series: s.model.clone() }))
            .collect();
        ExperimentReport::new(plan, vec!["model", "n", "replicate", "seed", "edges"], rows, &self.summaries, plot)
    }
}
