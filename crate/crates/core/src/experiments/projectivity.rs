use rayon::prelude::*;
use serde::Serialize;

use super::{replicate_seed, Cell, ExperimentPlan, ExperimentReport, PlotPoint};
use crate::error::Result;
use crate::model::LinkKind;
use crate::sampler::{generate, EdgeOptions};
use crate::seed::{derive, rng_from, tag};
use crate::stats::{permutation_tv_test, total_variation};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadRatio {
    /// Edge frequency among the leading `n1` nodes, restricted arm over direct arm.
    pub observed: f64,
    /// `s_{n2} / s_{n1} = (n2/n1)^{-p_s}`.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectivitySummary {
    pub model: String,
    pub n1: usize,
    pub n2: usize,
    /// Pattern frequencies of the direct arm, indexed by pattern code.
    pub direct: Vec<u64>,
    /// Pattern frequencies of the restricted arm.
    pub restricted: Vec<u64>,
    pub tv: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub rejected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dyad_ratio: Option<DyadRatio>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivityRow {
    pub model: usize,
    /// 0 for direct generation at `n1`, 1 for restriction from `n2`.
    pub arm: u8,
    pub replicate: usize,
    pub seed: u64,
    pub pattern: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivityOutcome {
    pub summaries: Vec<ProjectivitySummary>,
    pub rows: Vec<ProjectivityRow>,
}

fn edge_fraction(hist: &[u64], dyads: usize) -> f64 {
    let total: u64 = hist.iter().sum();
    let edges: u64 = hist.iter().enumerate().map(|(code, &c)| c * (code as u64).count_ones() as u64).sum();
    edges as f64 / (total as f64 * dyads as f64)
}

/// Compare the law of the `n1`-node graph with that of the leading `n1`
/// nodes of an `n2`-node graph.
pub fn run_projectivity_experiment(plan: &ExperimentPlan) -> Result<ProjectivityOutcome> {
    plan.validate()?;
    let (n1, n2) = (plan.n1.expect("validated"), plan.n2.expect("validated"));
    let dyads = n1 * (n1 - 1) / 2;
    let categories = 1usize << dyads;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (mi, (label, model, link)) in plan.resolved()?.into_iter().enumerate() {
        let arm = |a: u8, n: usize| -> Result<Vec<ProjectivityRow>> {
            (0..plan.replicates)
                .into_par_iter()
                .map(|r| {
                    let seed = replicate_seed(plan.seed, n, r);
                    let g = generate(&model, &link, n, seed, EdgeOptions::default())?;
                    Ok(ProjectivityRow { model: mi, arm: a, replicate: r, seed, pattern: g.adjacency.pattern_code(n1) })
                })
                .collect()
        };
        let direct = arm(0, n1)?;
        let restricted = arm(1, n2)?;
        let codes = |rows: &[ProjectivityRow]| rows.iter().map(|r| r.pattern).collect::<Vec<_>>();
        let (ca, cb) = (codes(&direct), codes(&restricted));
        let hist = |c: &[u64]| {
            let mut h = vec![0u64; categories];
            for &x in c {
                h[x as usize] += 1;
            }
            h
        };
        let (ha, hb) = (hist(&ca), hist(&cb));
        let mut rng = rng_from(derive(plan.seed, &[tag::PERMUTATION, mi as u64]));
        let test = if ha == hb {
            // Identical samples: the statistic is exactly 0 and every
            // permutation ties it.
            crate::stats::PermutationTest { statistic: total_variation(&ha, &hb), p_value: 1.0, permutations: plan.permutations }
        } else {
            permutation_tv_test(&ca, &cb, categories, plan.permutations, &mut rng)
        };
        let dyad_ratio = match link.kind() {
            LinkKind::ScaledGraphon { p_s, .. } => Some(DyadRatio {
                observed: edge_fraction(&hb, dyads) / edge_fraction(&ha, dyads),
                predicted: (n2 as f64 / n1 as f64).powf(-p_s),
            }),
            _ => None,
        };
        summaries.push(ProjectivitySummary {
            model: label,
            n1,
            n2,
            direct: ha,
            restricted: hb,
            tv: test.statistic,
            p_value: test.p_value,
            permutations: test.permutations,
            rejected: test.p_value < plan.alpha,
            dyad_ratio,
        });
        rows.extend(direct);
        rows.extend(restricted);
    }
    Ok(ProjectivityOutcome { summaries, rows })
}

impl ProjectivityOutcome {
    pub fn report(&self, plan: &ExperimentPlan) -> Result<ExperimentReport> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let s = &self.summaries[r.model];
                vec![
                    Cell::from(s.model.as_str()),
                    Cell::from(if r.arm == 0 { "direct" } else { "restricted" }),
                    (if r.arm == 0 { s.n1 } else { s.n2 }).into(),
                    r.replicate.into(),
                    r.seed.into(),
                    r.pattern.into(),
                ]
            })
            .collect();
        let mut plot = Vec::new();
        for s in &self.summaries {
            for (name, hist) in [("direct", &s.direct), ("restricted", &s.restricted)] {
                let total: u64 = hist.iter().sum();
                for (code, &c) in hist.iter().enumerate() {
                    plot.push(PlotPoint { x: code as f64, y: c as f64 / total as f64, series: format!("{} {name}", s.model) });
                }
            }
        }
        ExperimentReport::new(plan, vec!["model", "arm", "n", "replicate", "seed", "pattern"], rows, &self.summaries, plot)
    }
}
