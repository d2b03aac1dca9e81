use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lpm_core::error::Error;
use lpm_core::estimator::{fit_restricted_mle, FitConfig, Init};
use lpm_core::experiments::{self, ExperimentKind, ExperimentPlan};
use lpm_core::io::{edge_list, read_graph, write_graph, ErrorsRecord, FitRecord};
use lpm_core::likelihood::learnability_errors;
use lpm_core::model::{LinkFunction, WindowSchedule};
use lpm_core::sampler::{generate, EdgeOptions, ModelSpec};

/// Seed used when `--seed` is absent.
const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "lpm-lab", version, about = "Sample, fit and study projective sparse latent position models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rect,
    Gauss,
    Sgraphon,
    Rcm,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Mds,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as JSON.
    Sample {
        #[arg(long)]
        model: Family,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// Link descriptor, e.g. `poly:C=2,a=3`.
        #[arg(long)]
        link: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write a plain `i j` edge list.
        #[arg(long)]
        edge_list: Option<PathBuf>,
        #[arg(long)]
        sigma2: Option<f64>,
        /// Condition on the final arrival time (rectangular models only).
        #[arg(long = "T")]
        final_time: Option<f64>,
    },
    /// Fit latent positions by restricted maximum likelihood.
    Fit {
        #[arg(long)]
        graph: PathBuf,
        /// Link descriptor; defaults to the link recorded in the graph file.
        #[arg(long)]
        link: Option<String>,
        /// Latent dimension; defaults to the graph's model dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Norm bound: a positive number or `auto`.
        #[arg(long = "G", default_value = "auto")]
        g: String,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        init: Option<InitArg>,
        /// Slack `c` of the Gaussian norm bound used by `--G auto`.
        #[arg(long, default_value_t = 1.0)]
        gaussian_c: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment plan.
    Exp {
        kind: String,
        #[arg(long)]
        config: PathBuf,
        /// Output stem; `<stem>.csv`, `<stem>.summary.json` and `<stem>.plot.csv` are written.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn build_model(family: Family, d: Option<usize>, p: Option<f64>, sigma2: Option<f64>, final_time: Option<f64>) -> Result<ModelSpec<f64>, Failure> {
    if final_time.is_some() && !matches!(family, Family::Rect) {
        return usage("--T applies to --model rect only");
    }
    let need_d = || d.ok_or_else(|| Failure::Usage("--d is required for this model".into()));
    let need_s = || sigma2.ok_or_else(|| Failure::Usage("--sigma2 is required for this model".into()));
    Ok(match family {
        Family::Rect => {
            let p = p.ok_or_else(|| Failure::Usage("--p is required for --model rect".into()))?;
            ModelSpec::Rectangular { window: WindowSchedule::new(need_d()?, p)?, final_time }
        }
        Family::Rcm => {
            if d.is_some_and(|d| d != 1) || p.is_some_and(|p| p != 1.0) {
                return usage("--model rcm fixes d = 1 and p = 1");
            }
            ModelSpec::RandomConnection
        }
        Family::Gauss => ModelSpec::Gaussian { d: need_d()?, sigma2: need_s()? },
        Family::Sgraphon => ModelSpec::SparseGraphon { d: need_d()?, sigma2: need_s()? },
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    family: Family,
    d: Option<usize>,
    p: Option<f64>,
    link: &str,
    n: usize,
    seed: u64,
    out: &Path,
    edges_out: Option<&Path>,
    sigma2: Option<f64>,
    final_time: Option<f64>,
) -> Result<(), Failure> {
    let model = build_model(family, d, p, sigma2, final_time)?;
    let link: LinkFunction<f64> = link.parse()?;
    if n == 0 {
        return usage("--n must be positive");
    }
    let g = generate(&model, &link, n, seed, EdgeOptions::default())?;
    write_graph(out, &g).map_err(|e| io_failure(out, e))?;
    if let Some(path) = edges_out {
        fs::write(path, edge_list(&g.adjacency)).map_err(|e| io_failure(path, e))?;
    }
    eprintln!("sampled {} graph: n={} edges={} seed={}", model.family(), g.n(), g.adjacency.edge_count(), seed);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    graph: &Path,
    link: Option<&str>,
    dim: Option<usize>,
    g_arg: &str,
    restarts: Option<usize>,
    seed: u64,
    max_iters: Option<usize>,
    init: Option<InitArg>,
    gaussian_c: f64,
    out: &Path,
) -> Result<(), Failure> {
    let record = read_graph(graph).map_err(|e| match e {
        Error::Io(e) => io_failure(graph, e),
        other => Failure::Runtime(format!("{}: {other}", graph.display())),
    })?;
    let n = record.adjacency.len();
    let model = record.meta.model_spec().ok();
    let link: LinkFunction<f64> = match link {
        Some(s) => s.parse()?,
        None => record.meta.link_function().map_err(|_| Failure::Usage("--link is required: the graph file records no link".into()))?,
    };
    let dim = match (dim, &model) {
        (Some(d), _) => d,
        (None, Some(m)) => m.dim(),
        (None, None) => return usage("--dim is required: the graph file records no model"),
    };
    let g = if g_arg == "auto" {
        let Some(m) = &model else {
            return usage("--G auto needs model information in the graph meta");
        };
        m.regularity(gaussian_c)?.at(n)
    } else {
        match g_arg.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            _ => return usage(format!("--G must be a positive number or `auto`, got `{g_arg}`")),
        }
    };
    let mut cfg = FitConfig { seed, ..FitConfig::default() };
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    match init {
        Some(InitArg::Mds) => cfg.init = Init::Mds,
        Some(InitArg::Random) => cfg.init = Init::Random,
        None => {}
    }
    cfg.validate()?;
    let fit = fit_restricted_mle(&record.adjacency, &link, dim, g, &cfg)?;
    let errors = match (&model, &record.config) {
        (Some(m), Some(c)) if c.dim() == dim => {
            let e_n = m.edge_scale(&link, n);
            Some(ErrorsRecord::new(learnability_errors(&fit.z_hat, c.positions(), &link, e_n)?, e_n))
        }
        _ => None,
    };
    let text = FitRecord::new(&fit, &cfg, g, &link, errors).to_json()?;
    fs::write(out, text).map_err(|e| io_failure(out, e))?;
    eprintln!(
        "fitted n={n} dim={dim} G={g:.6} loglik={:.6} iterations={} converged={} seed={seed}",
        fit.loglik, fit.iterations, fit.converged
    );
    Ok(())
}

fn cmd_exp(kind: &str, config: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let kind: ExperimentKind = kind.parse()?;
    let text = fs::read_to_string(config).map_err(|e| io_failure(config, e))?;
    let plan = ExperimentPlan::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Failure::Runtime(format!("{}: {j}", config.display())),
        other => other.into(),
    })?;
    if plan.kind != kind {
        return usage(format!("the plan describes a `{}` experiment, not `{}`", plan.kind.name(), kind.name()));
    }
    let violations = plan.violations();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
        return usage(format!("invalid experiment plan:\n{}", list.join("\n")));
    }
    let stem = match (out, &plan.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return usage("--out is required when the plan has no `output`"),
    };
    let report = experiments::run(&plan)?;
    let paths = report.write(&stem).map_err(|e| io_failure(&stem, e))?;
    eprintln!(
        "{} experiment: {} models, {} rows, seed={} -> {}",
        kind.name(),
        plan.models.len(),
        report.rows.len(),
        plan.seed,
        paths[0].display()
    );
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("LPM_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = match v.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return usage(format!("LPM_LAB_THREADS must be a positive integer, got `{v}`")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Sample { model, d, p, link, n, seed, out, edge_list, sigma2, final_time } => {
            cmd_sample(*model, *d, *p, link, *n, *seed, out, edge_list.as_deref(), *sigma2, *final_time)
        }
        Command::Fit { graph, link, dim, g, restarts, seed, max_iters, init, gaussian_c, out } => {
            cmd_fit(graph, link.as_deref(), *dim, g, *restarts, *seed, *max_iters, *init, *gaussian_c, out)
        }
        Command::Exp { kind, config, out } => cmd_exp(kind, config, out.as_deref()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
