use rayon::prelude::*;
use serde::Serialize;

use super::{non_increasing, replicate_seed, Cell, ExperimentPlan, ExperimentReport, PlotPoint};
use crate::error::{Error, Result};
use crate::sampler::config_seed;
use crate::seed::rng_from;
use crate::stats::binomial_sd;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityPoint {
    pub n: usize,
    pub replicates: usize,
    /// `√d·g(n + √(n log n))`.
    pub bound: f64,
    /// `2√d·g(n)`.
    pub coarse_bound: f64,
    pub freq_exceed: f64,
    pub freq_exceed_coarse: f64,
    /// `1 / log n`.
    pub reference: f64,
    /// Binomial standard deviation of a frequency with mean `1 / log n`.
    pub reference_sd: f64,
    /// `freq_exceed ≤ 1/log n + 3 sd`.
    pub within_band: bool,
    /// Every node lies in its own window box `|Z_k| ≤ g(t_n)`.
    pub box_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularitySummary {
    pub model: String,
    pub points: Vec<RegularityPoint>,
    pub coarse_non_increasing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityRow {
    pub model: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub max_norm: f64,
    pub final_time: f64,
    pub exceed: bool,
    pub exceed_coarse: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityOutcome {
    pub summaries: Vec<RegularitySummary>,
    pub rows: Vec<RegularityRow>,
}

/// Frequency with which the largest latent norm exceeds the high-probability
/// bounds, against `1 / log n`.
pub fn run_regularity_experiment(plan: &ExperimentPlan) -> Result<RegularityOutcome> {
    plan.validate()?;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (mi, (label, model, _link)) in plan.resolved()?.into_iter().enumerate() {
        let w = model.window().ok_or_else(|| Error::Usage("regularity needs a rectangular model".into()))?;
        let sd = (w.dim() as f64).sqrt();
        let mut points = Vec::new();
        for &n in &plan.n_grid {
            let nf = n as f64;
            let logn = nf.ln();
            let bound = sd * w.halfwidth(nf + (nf * logn).sqrt());
            let coarse_bound = 2.0 * sd * w.halfwidth(nf);
            let reps: Vec<(RegularityRow, bool)> = (0..plan.replicates)
                .into_par_iter()
                .map(|r| {
                    let seed = replicate_seed(plan.seed, n, r);
                    let c = model.sample_config(n, &mut rng_from(config_seed(seed)))?;
                    let max_norm = c.max_norm();
                    let final_time = *c.arrivals().last().expect("n ≥ 1");
                    let g_t = w.halfwidth(final_time);
                    let box_ok = c.positions().iter().all(|x| x.abs() <= g_t);
                    let row = RegularityRow {
                        model: mi,
                        n,
                        replicate: r,
                        seed,
                        max_norm,
                        final_time,
                        exceed: max_norm > bound,
                        exceed_coarse: max_norm > coarse_bound,
                    };
                    Ok((row, box_ok))
                })
                .collect::<Result<_>>()?;
            let reps_n = reps.len();
            let freq = |f: fn(&RegularityRow) -> bool| reps.iter().filter(|(r, _)| f(r)).count() as f64 / reps_n as f64;
            let reference = if n >= 2 { 1.0 / logn } else { 1.0 };
            let reference_sd = binomial_sd(reference.min(1.0), reps_n);
            let freq_exceed = freq(|r| r.exceed);
            points.push(RegularityPoint {
                n,
                replicates: reps_n,
                bound,
                coarse_bound,
                freq_exceed,
                freq_exceed_coarse: freq(|r| r.exceed_coarse),
                reference,
                reference_sd,
                within_band: freq_exceed <= reference + 3.0 * reference_sd,
                box_ok: reps.iter().all(|(_, b)| *b),
            });
            rows.extend(reps.into_iter().map(|(r, _)| r));
        }
        let coarse: Vec<f64> = points.iter().map(|p| p.freq_exceed_coarse).collect();
        summaries.push(RegularitySummary { model: label, coarse_non_increasing: non_increasing(&coarse), points });
    }
    Ok(RegularityOutcome { summaries, rows })
}

impl RegularityOutcome {
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
                    r.max_norm.into(),
                    r.final_time.into(),
                    r.exceed.into(),
                    r.exceed_coarse.into(),
                ]
            })
            .collect();
        let mut plot = Vec::new();
        for s in &self.summaries {
            for p in &s.points {
                plot.push(PlotPoint { x: p.n as f64, y: p.freq_exceed, series: format!("{} exceed", s.model) });
                plot.push(PlotPoint { x: p.n as f64, y: p.freq_exceed_coarse, series: format!("{} exceed_coarse", s.model) });
                plot.push(PlotPoint { x: p.n as f64, y: p.reference, series: format!("{} 1/log n", s.model) });
            }
        }
        let columns = vec!["model", "n", "replicate", "seed", "max_norm", "final_time", "exceed", "exceed_coarse"];
        ExperimentReport::new(plan, columns, rows, &self.summaries, plot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{describe, test_plan, ExperimentKind};

    #[test]
    fn constant_window_stays_in_box() {
        let plan = test_plan(
            ExperimentKind::Regularity,
            vec![describe("rect", Some(2), Some(0.0), None, "poly:C=2,a=3")],
            vec![20, 40],
            50,
        );
        let out = run_regularity_experiment(&plan).unwrap();
        for p in &out.summaries[0].points {
            assert!(p.box_ok);
            // g ≡ 1, and every norm is at most √2.
            assert_eq!(p.freq_exceed_coarse, 0.0);
        }
    }

    #[test]
    fn random_connection_band() {
        let plan = test_plan(ExperimentKind::Regularity, vec![describe("rcm", None, None, None, "poly:C=2,a=3")], vec![50, 200], 500);
        let out = run_regularity_experiment(&plan).unwrap();
        assert!(out.summaries[0].points.iter().all(|p| p.within_band && p.box_ok));
    }
}
