//! File formats: graph and fit JSON, plain edge lists, schema versioning.
//!
//! Every file carries `schema_version`. Readers accept any minor version of
//! the current major and reject everything else.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{FitConfig, FitResult};
use crate::likelihood::LearnabilityErrors;
use crate::model::{LinkFunction, WindowSchedule};
use crate::sampler::{Adjacency, GraphSample, LatentConfiguration, Layout, ModelSpec};

pub const SCHEMA_VERSION: &str = "1.0";
const SCHEMA_MAJOR: &str = "1";

/// Accept `1.x`, reject any other major version.
pub fn check_schema(version: &str) -> Result<()> {
    match version.split('.').next() {
        Some(major) if major == SCHEMA_MAJOR => Ok(()),
        _ => Err(Error::Schema(format!("unsupported schema_version `{version}` (this build reads {SCHEMA_MAJOR}.x)"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    /// Final arrival time of the conditional sampler.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n: usize,
}

impl GraphMeta {
    pub fn of(g: &GraphSample<f64>) -> Self {
        let (p, final_time) = match &g.model {
            ModelSpec::Rectangular { window, final_time } => (Some(window.p()), *final_time),
            ModelSpec::RandomConnection => (Some(1.0), None),
            _ => (None, None),
        };
        Self {
            model: Some(g.model.family().to_string()),
            link: Some(g.link.to_string()),
            d: Some(g.model.dim()),
            p,
            sigma2: g.model.sigma2(),
            final_time,
            seed: Some(g.seed),
            n: g.n(),
        }
    }

    /// Rebuild the model. Fails when the family or a required parameter is
    /// missing.
    pub fn model_spec(&self) -> Result<ModelSpec<f64>> {
        let family = self.model.as_deref().ok_or_else(|| Error::Usage("graph meta has no model family".into()))?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Usage(format!("graph meta for `{family}` lacks `{name}`")));
        let dim = || self.d.ok_or_else(|| Error::Usage(format!("graph meta for `{family}` lacks `d`")));
        match family {
            "rect" => Ok(ModelSpec::Rectangular { window: WindowSchedule::new(dim()?, need(self.p, "p")?)?, final_time: self.final_time }),
            "rcm" => Ok(ModelSpec::RandomConnection),
            "gauss" => Ok(ModelSpec::Gaussian { d: dim()?, sigma2: need(self.sigma2, "sigma2")? }),
            "sgraphon" => Ok(ModelSpec::SparseGraphon { d: dim()?, sigma2: need(self.sigma2, "sigma2")? }),
            other => Err(Error::Usage(format!("unknown model family `{other}`"))),
        }
    }

    pub fn link_function(&self) -> Result<LinkFunction<f64>> {
        self.link.as_deref().ok_or_else(|| Error::Usage("graph meta has no link".into()))?.parse()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    schema_version: String,
    meta: GraphMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arrivals: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux: Option<Vec<f64>>,
    edges: Vec<[usize; 2]>,
}

/// A graph file as loaded: the adjacency plus, when present, the
/// generating model, link and latent configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphRecord {
    pub meta: GraphMeta,
    pub adjacency: Adjacency,
    pub config: Option<LatentConfiguration<f64>>,
}

impl GraphRecord {
    /// The full sample, available when the file has model, link and positions.
    pub fn into_sample(self) -> Result<GraphSample<f64>> {
        let model = self.meta.model_spec()?;
        let link = self.meta.link_function()?;
        let config = self.config.ok_or_else(|| Error::Usage("graph file has no latent positions".into()))?;
        Ok(GraphSample { adjacency: self.adjacency, config, link, model, seed: self.meta.seed.unwrap_or(0) })
    }
}

fn layout_of(model: &ModelSpec<f64>) -> Layout<f64> {
    match model {
        ModelSpec::Rectangular { window, .. } => Layout::Rectangular(*window),
        ModelSpec::RandomConnection => Layout::Rectangular(WindowSchedule::random_connection()),
        ModelSpec::Gaussian { sigma2, .. } => Layout::ExchangeableGaussian { sigma2: *sigma2 },
        ModelSpec::SparseGraphon { sigma2, .. } => Layout::SparseGraphon { sigma2: *sigma2 },
    }
}

pub fn graph_to_json(g: &GraphSample<f64>) -> Result<String> {
    let c = &g.config;
    let file = GraphFile {
        schema_version: SCHEMA_VERSION.into(),
        meta: GraphMeta::of(g),
        arrivals: Some(c.arrivals().to_vec()),
        positions: Some(matrix_rows(c.positions())),
        aux: Some(c.aux().to_vec()),
        edges: g.adjacency.edges().map(|(i, j)| [i, j]).collect(),
    };
    let mut s = serde_json::to_string(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn graph_from_json(text: &str) -> Result<GraphRecord> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let version = v.get("schema_version").and_then(|s| s.as_str()).ok_or_else(|| Error::Schema("missing schema_version".into()))?;
    check_schema(version)?;
    let f: GraphFile = serde_json::from_value(v)?;
    let n = f.meta.n;
    let edges: Vec<(usize, usize)> = f.edges.iter().map(|e| (e[0], e[1])).collect();
    if edges.iter().any(|&(i, j)| i >= j) {
        return Err(Error::Schema("edges must be listed as [i, j] with i < j".into()));
    }
    let adjacency = Adjacency::from_edges(n, &edges)?;
    let config = match (f.positions, f.arrivals, f.aux) {
        (Some(pos), arrivals, aux) => {
            let d = f.meta.d.or_else(|| pos.first().map(Vec::len)).unwrap_or(0);
            if pos.len() != n || pos.iter().any(|r| r.len() != d) {
                return Err(Error::Schema(format!("positions must be {n} rows of length {d}")));
            }
            let flat: Vec<f64> = pos.into_iter().flatten().collect();
            let positions = DMatrix::from_row_slice(n, d, &flat);
            let arrivals = arrivals.unwrap_or_else(|| (1..=n).map(|k| k as f64).collect());
            let aux = aux.unwrap_or_else(|| vec![0.0; n]);
            let layout = match f.meta.model_spec() {
                Ok(m) => layout_of(&m),
                Err(_) => Layout::ExchangeableGaussian { sigma2: 1.0 },
            };
            Some(LatentConfiguration::from_parts(positions, aux, arrivals, layout)?)
        }
        (None, _, _) => None,
    };
    Ok(GraphRecord { meta: f.meta, adjacency, config })
}

pub fn write_graph(path: &Path, g: &GraphSample<f64>) -> Result<()> {
    fs::write(path, graph_to_json(g)?)?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<GraphRecord> {
    graph_from_json(&fs::read_to_string(path)?)
}

/// `i j` lines, 0-indexed, `i < j`, after a `#` header carrying the schema
/// version.
pub fn edge_list(adj: &Adjacency) -> String {
    let mut s = format!("# schema_version {SCHEMA_VERSION} nodes {}\n", adj.len());
    for (i, j) in adj.edges() {
        s.push_str(&format!("{i} {j}\n"));
    }
    s
}

/// Parse an edge list. Without a `nodes` header the node count is one more
/// than the largest index.
pub fn parse_edge_list(text: &str) -> Result<Adjacency> {
    let mut nodes = None;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(header) = line.strip_prefix('#') {
            let words: Vec<&str> = header.split_whitespace().collect();
            for w in words.windows(2) {
                match w[0] {
                    "schema_version" => check_schema(w[1])?,
                    "nodes" => nodes = w[1].parse().ok(),
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(i)), Some(Ok(j)), None) if i < j => edges.push((i, j)),
            _ => return Err(Error::Schema(format!("edge list line {}: expected `i j` with i < j", lineno + 1))),
        }
    }
    let n = nodes.unwrap_or_else(|| edges.iter().map(|&(_, j)| j + 1).max().unwrap_or(0));
    Adjacency::from_edges(n, &edges)
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorsRecord {
    pub pos_err: f64,
    pub dist_err: f64,
    pub prob_err: f64,
    pub e_n: f64,
}

impl ErrorsRecord {
    pub fn new(e: LearnabilityErrors<f64>, e_n: f64) -> Self {
        Self { pos_err: e.pos_err, dist_err: e.dist_err, prob_err: e.prob_err, e_n }
    }
}

/// Serialized fit. Wall-clock time is left out so reruns are identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub schema_version: String,
    #[serde(rename = "Z_hat")]
    pub z_hat: Vec<Vec<f64>>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub seed: u64,
    #[serde(rename = "G")]
    pub g: f64,
    pub dim: usize,
    pub link: String,
    pub config: FitConfig,
    pub trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorsRecord>,
}

impl FitRecord {
    pub fn new(fit: &FitResult<f64>, cfg: &FitConfig, g: f64, link: &LinkFunction<f64>, errors: Option<ErrorsRecord>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            z_hat: matrix_rows(&fit.z_hat),
            loglik: fit.loglik,
            iterations: fit.iterations,
            converged: fit.converged,
            restarts_used: fit.restarts_used,
            best_restart: fit.best_restart,
            seed: cfg.seed,
            g,
            dim: fit.z_hat.ncols(),
            link: link.to_string(),
            config: cfg.clone(),
            trace: fit.trace.clone(),
            errors,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        check_schema(&r.schema_version)?;
        Ok(r)
    }
}
