//! Seeded Monte-Carlo experiments: edge-count growth, projectivity,
//! learnability curves, Gram eigenvalue scaling and norm bounds.
//!
//! Replicate `r` at size `n` uses the seed `derive(plan.seed, [REPLICATE, n, r])`,
//! so any row of a report can be regenerated on its own. Replicates run in
//! parallel; results are folded in `(model, n, replicate)` order.

mod eigen;
mod learnability;
mod projectivity;
mod regularity;
mod sparsity;

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::FitConfig;
use crate::io::{check_schema, SCHEMA_VERSION};
use crate::model::{LinkFunction, WindowSchedule};
use crate::sampler::ModelSpec;
use crate::seed::{derive, tag};
use crate::stats::{least_squares, SlopeFit};

pub use eigen::{run_eigenvalue_experiment, EigenOutcome, EigenPoint, EigenRow, EigenSummary};
pub use learnability::{run_learnability_experiment, LearnabilityOutcome, LearnabilityPoint, LearnabilityRow, LearnabilitySummary};
pub use projectivity::{run_projectivity_experiment, DyadRatio, ProjectivityOutcome, ProjectivityRow, ProjectivitySummary};
pub use regularity::{run_regularity_experiment, RegularityOutcome, RegularityPoint, RegularityRow, RegularitySummary};
pub use sparsity::{run_sparsity_experiment, GridMean, SparsityOutcome, SparsityRow, SparsitySummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sparsity,
    Projectivity,
    Learnability,
    Eigenvalues,
    Regularity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sparsity => "sparsity",
            Self::Projectivity => "projectivity",
            Self::Learnability => "learnability",
            Self::Eigenvalues => "eigenvalues",
            Self::Regularity => "regularity",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Usage(format!("unknown experiment kind `{s}`")))
    }
}

/// A model as written in a plan file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    /// `rect`, `rcm`, `gauss` or `sgraphon`.
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    pub link: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ModelDescriptor {
    pub fn spec(&self) -> Result<ModelSpec<f64>> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Usage(format!("model `{}` needs `{name}`", self.family)))
        };
        let dim = || self.d.ok_or_else(|| Error::Usage(format!("model `{}` needs `d`", self.family)));
        match self.family.as_str() {
            "rect" => Ok(ModelSpec::Rectangular { window: WindowSchedule::new(dim()?, need(self.p, "p")?)?, final_time: None }),
            "rcm" => Ok(ModelSpec::RandomConnection),
            "gauss" => Ok(ModelSpec::Gaussian { d: dim()?, sigma2: need(self.sigma2, "sigma2")? }),
            "sgraphon" => Ok(ModelSpec::SparseGraphon { d: dim()?, sigma2: need(self.sigma2, "sigma2")? }),
            other => Err(Error::Usage(format!("unknown model family `{other}`"))),
        }
    }

    pub fn link_function(&self) -> Result<LinkFunction<f64>> {
        self.link.parse()
    }

    /// Series name used in reports.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mut parts = vec![self.family.clone()];
        if let Some(d) = self.d {
            parts.push(format!("d={d}"));
        }
        if let Some(p) = self.p {
            parts.push(format!("p={p}"));
        }
        if let Some(s) = self.sigma2 {
            parts.push(format!("sigma2={s}"));
        }
        parts.push(self.link.clone());
        parts.join(" ")
    }
}

fn default_permutations() -> usize {
    999
}

fn default_alpha() -> f64 {
    0.01
}

fn default_slack() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<String>,
    pub kind: ExperimentKind,
    pub models: Vec<ModelDescriptor>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Estimator settings (learnability only).
    #[serde(default)]
    pub fit: FitConfig,
    /// Slack `c` of the Gaussian norm bound.
    #[serde(default = "default_slack")]
    pub gaussian_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    /// Test level for reported decisions.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text)?;
        if let Some(v) = &plan.schema_version {
            check_schema(v)?;
        }
        Ok(plan)
    }

    /// Every violated invariant, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        use ExperimentKind::*;
        let mut v = Vec::new();
        if self.models.is_empty() {
            v.push("plan lists no models".to_string());
        }
        for m in &self.models {
            if let Err(e) = m.spec().and_then(|s| m.link_function().map(|l| (s, l))).and_then(|(s, l)| s.check_link(&l)) {
                v.push(format!("model `{}`: {e}", m.label()));
            }
        }
        let grid_kind = self.kind != Projectivity;
        if grid_kind {
            if self.n_grid.is_empty() {
                v.push("n_grid is empty".into());
            }
            if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
                v.push("n_grid must be strictly ascending".into());
            }
            if self.n_grid.first() == Some(&0) {
                v.push("n_grid entries must be positive".into());
            }
        }
        if matches!(self.kind, Sparsity | Learnability) && self.n_grid.len() < 3 {
            v.push("n_grid needs length ≥ 3 for slope fits".into());
        }
        if self.kind == Eigenvalues && self.n_grid.len() < 2 {
            v.push("n_grid needs length ≥ 2 for a coefficient of variation".into());
        }
        if self.replicates == 0 {
            v.push("replicates must be positive".into());
        }
        if matches!(self.kind, Projectivity | Regularity) && self.replicates < 30 {
            v.push("replicates must be ≥ 30 for statistical tests".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            v.push("alpha must lie in (0,1)".into());
        }
        if self.kind == Projectivity {
            match (self.n1, self.n2) {
                (Some(n1), Some(n2)) => {
                    if !(n1 == 2 || n1 == 3) {
                        v.push("n1 must be 2 or 3".into());
                    }
                    if n2 < n1 || n2 > 20 * n1 {
                        v.push("n2 must satisfy n1 ≤ n2 ≤ 20·n1".into());
                    }
                }
                _ => v.push("projectivity needs n1 and n2".into()),
            }
            if self.permutations == 0 {
                v.push("permutations must be positive".into());
            }
        }
        if self.kind == Learnability {
            if let Err(e) = self.fit.validate() {
                v.push(format!("fit: {e}"));
            }
        }
        for m in &self.models {
            let family = m.family.as_str();
            let ok = match self.kind {
                Eigenvalues => matches!(family, "rect" | "rcm" | "gauss"),
                Regularity => matches!(family, "rect" | "rcm"),
                _ => true,
            };
            if !ok {
                v.push(format!("{} experiment does not support model family `{family}`", self.kind.name()));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Usage(v.join("; ")))
        }
    }

    pub(crate) fn resolved(&self) -> Result<Vec<(String, ModelSpec<f64>, LinkFunction<f64>)>> {
        self.models.iter().map(|m| Ok((m.label(), m.spec()?, m.link_function()?))).collect()
    }
}

/// `derive(seed, [REPLICATE, n, r])`.
pub fn replicate_seed(seed: u64, n: usize, replicate: usize) -> u64 {
    derive(seed, &[tag::REPLICATE, n as u64, replicate as u64])
}

/// Least squares on `(log n, log value)`.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Usage(format!("slope fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Usage(format!("slope fit needs positive values, got ({x}, {y})")));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    least_squares(&lx, &ly)
}

/// Non-increasing sequence test.
pub fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

/// A CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Real(f64),
    Flag(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int(v) => write!(f, "{v}"),
            // Debug formatting is the shortest representation that parses back
            // to the same double.
            Cell::Real(v) => write!(f, "{v:?}"),
            Cell::Flag(b) => f.write_str(if *b { "1" } else { "0" }),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

/// Raw rows, aggregates and plot data of one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Kind-specific aggregates.
    pub results: serde_json::Value,
    pub plot: Vec<PlotPoint>,
    pub plan: ExperimentPlan,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    schema_version: &'a str,
    kind: &'a str,
    code_version: &'a str,
    plan: &'a ExperimentPlan,
    results: &'a serde_json::Value,
}

impl ExperimentReport {
    pub(crate) fn new<S: Serialize>(
        plan: &ExperimentPlan,
        columns: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
        results: &S,
        plot: Vec<PlotPoint>,
    ) -> Result<Self> {
        Ok(Self { kind: plan.kind, columns, rows, results: serde_json::to_value(results)?, plot, plan: plan.clone() })
    }

    /// Raw rows; the first column is `schema_version`.
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["schema_version"];
        header.extend(&self.columns);
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![SCHEMA_VERSION.to_string()];
            rec.extend(row.iter().map(Cell::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        finish(w)
    }

    /// Tidy `(x, y, series)` rows.
    pub fn plot_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["schema_version", "x", "y", "series"]).map_err(csv_err)?;
        for p in &self.plot {
            w.write_record([SCHEMA_VERSION.to_string(), format!("{:?}", p.x), format!("{:?}", p.y), p.series.clone()])
                .map_err(csv_err)?;
        }
        finish(w)
    }

    pub fn summary_json(&self) -> Result<String> {
        let file = SummaryFile {
            schema_version: SCHEMA_VERSION,
            kind: self.kind.name(),
            code_version: env!("CARGO_PKG_VERSION"),
            plan: &self.plan,
            results: &self.results,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    /// Write `<stem>.csv`, `<stem>.summary.json` and `<stem>.plot.csv`.
    /// Returns the three paths.
    pub fn write(&self, stem: &Path) -> Result<[std::path::PathBuf; 3]> {
        let with = |suffix: &str| {
            let mut s = stem.as_os_str().to_owned();
            s.push(suffix);
            std::path::PathBuf::from(s)
        };
        let paths = [with(".csv"), with(".summary.json"), with(".plot.csv")];
        fs::write(&paths[0], self.rows_csv()?)?;
        fs::write(&paths[1], self.summary_json()?)?;
        fs::write(&paths[2], self.plot_csv()?)?;
        Ok(paths)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// Validate the plan and run the experiment it names.
pub fn run(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    match plan.kind {
        ExperimentKind::Sparsity => run_sparsity_experiment(plan)?.report(plan),
        ExperimentKind::Projectivity => run_projectivity_experiment(plan)?.report(plan),
        ExperimentKind::Learnability => run_learnability_experiment(plan)?.report(plan),
        ExperimentKind::Eigenvalues => run_eigenvalue_experiment(plan)?.report(plan),
        ExperimentKind::Regularity => run_regularity_experiment(plan)?.report(plan),
    }
}

#[cfg(test)]
pub(crate) fn test_plan(kind: ExperimentKind, models: Vec<ModelDescriptor>, n_grid: Vec<usize>, replicates: usize) -> ExperimentPlan {
    ExperimentPlan {
        schema_version: None,
        kind,
        models,
        n_grid,
        replicates,
        seed: 7,
        fit: FitConfig::default(),
        gaussian_c: 1.0,
        n1: None,
        n2: None,
        permutations: 999,
        alpha: 0.01,
        output: None,
    }
}

#[cfg(test)]
pub(crate) fn describe(family: &str, d: Option<usize>, p: Option<f64>, sigma2: Option<f64>, link: &str) -> ModelDescriptor {
    ModelDescriptor { family: family.into(), d, p, sigma2, link: link.into(), label: None }
}
