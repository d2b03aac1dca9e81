//! Latent configurations, graph samples and the generative pipeline.

pub mod adjacency;
pub mod baseline;
pub mod config;
pub mod edges;
pub mod rectangular;

use rand::Rng;

pub use adjacency::Adjacency;
pub use baseline::{sample_exchangeable_gaussian, sample_sparse_graphon_config};
pub use config::{LatentConfiguration, Layout};
pub use edges::{count_edges, dyad_edge, sample_adjacency, EdgeOptions};
pub use rectangular::{
    sample_arrivals, sample_rectangular, sample_rectangular_exchangeable, sample_rectangular_window,
    sample_shell_position, Facet,
};

use crate::error::{domain, usage, Result};
use crate::model::{LinkFunction, LinkKind, RegularityBound, WindowSchedule};
use crate::seed::{derive, rng_from, tag};
use crate::Real;

/// A generative model for latent configurations. The link is supplied
/// separately.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec<T: Real> {
    /// Rectangular LPM. With `final_time` set, nodes are drawn from the
    /// conditional sampler given `t_n = final_time`.
    Rectangular { window: WindowSchedule<T>, final_time: Option<T> },
    /// Poisson random connection model: rectangular with `d = 1, p = 1`.
    RandomConnection,
    Gaussian { d: usize, sigma2: T },
    SparseGraphon { d: usize, sigma2: T },
}

impl<T: Real> ModelSpec<T> {
    pub fn rectangular(d: usize, p: T) -> Result<Self> {
        Ok(Self::Rectangular { window: WindowSchedule::new(d, p)?, final_time: None })
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Rectangular { .. } => "rect",
            Self::RandomConnection => "rcm",
            Self::Gaussian { .. } => "gauss",
            Self::SparseGraphon { .. } => "sgraphon",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Rectangular { window, .. } => window.dim(),
            Self::RandomConnection => 1,
            Self::Gaussian { d, .. } | Self::SparseGraphon { d, .. } => *d,
        }
    }

    /// The rectangular window, when the model has one.
    pub fn window(&self) -> Option<WindowSchedule<T>> {
        match self {
            Self::Rectangular { window, .. } => Some(*window),
            Self::RandomConnection => Some(WindowSchedule::random_connection()),
            _ => None,
        }
    }

    pub fn p(&self) -> Option<T> {
        self.window().map(|w| w.p())
    }

    pub fn sigma2(&self) -> Option<T> {
        match self {
            Self::Gaussian { sigma2, .. } | Self::SparseGraphon { sigma2, .. } => Some(*sigma2),
            _ => None,
        }
    }

    /// Regularity bound `G(n)`; `c` is the slack of the Gaussian bound.
    pub fn regularity(&self, c: T) -> Result<RegularityBound<T>> {
        match self.window() {
            Some(w) => RegularityBound::rectangular(w.dim(), w.p()),
            None => RegularityBound::gaussian(self.sigma2().expect("gaussian family"), c),
        }
    }

    /// Theoretical exponent `b` of the expected edge count `Θ(n^b)`.
    pub fn sparsity_exponent(&self, link: &LinkFunction<T>) -> T {
        match self {
            Self::Rectangular { window, .. } => window.sparsity_exponent(),
            Self::RandomConnection => T::one(),
            Self::Gaussian { .. } => T::lit(2.0),
            Self::SparseGraphon { .. } => match link.kind() {
                LinkKind::ScaledGraphon { p_s, .. } => T::lit(2.0) - *p_s,
                _ => T::lit(2.0),
            },
        }
    }

    /// `e(n)`, the edge-count scale used to normalise link-probability error.
    pub fn edge_scale(&self, link: &LinkFunction<T>, n: usize) -> T {
        T::count(n).powf(self.sparsity_exponent(link))
    }

    /// Size-dependent links belong to the sparse-graphon model and nowhere else.
    pub fn check_link(&self, link: &LinkFunction<T>) -> Result<()> {
        match (self, link.needs_size()) {
            (Self::SparseGraphon { .. }, false) => usage("the sparse-graphon model needs an `sgraphon:` link"),
            (Self::SparseGraphon { .. }, true) => Ok(()),
            (_, true) => usage("size-dependent links are only valid for the sparse-graphon model"),
            _ => Ok(()),
        }
    }

    pub fn sample_config<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LatentConfiguration<T>> {
        match self {
            Self::Rectangular { window, final_time: Some(tf) } => sample_rectangular_exchangeable(n, *tf, window, rng),
            Self::Rectangular { window, final_time: None } => sample_rectangular(n, window, rng),
            Self::RandomConnection => sample_rectangular(n, &WindowSchedule::random_connection(), rng),
            Self::Gaussian { d, sigma2 } => sample_exchangeable_gaussian(n, *d, *sigma2, rng),
            Self::SparseGraphon { d, sigma2 } => sample_sparse_graphon_config(n, *d, *sigma2, rng),
        }
    }
}

/// A sampled graph with its generating latent configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample<T: Real> {
    pub adjacency: Adjacency,
    pub config: LatentConfiguration<T>,
    pub link: LinkFunction<T>,
    pub model: ModelSpec<T>,
    pub seed: u64,
}

impl<T: Real> GraphSample<T> {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }
}

/// Seed of the configuration stream for a graph seed.
pub fn config_seed(seed: u64) -> u64 {
    derive(seed, &[tag::CONFIG])
}

/// Sample an `n`-node graph: configuration from `config_seed(seed)`, edges
/// from the dyad substreams of `seed`.
pub fn generate<T: Real>(
    model: &ModelSpec<T>,
    link: &LinkFunction<T>,
    n: usize,
    seed: u64,
    opts: EdgeOptions,
) -> Result<GraphSample<T>> {
    model.check_link(link)?;
    let config = model.sample_config(n, &mut rng_from(config_seed(seed)))?;
    sample_edges(config, model, link, seed, opts)
}

/// Attach Bernoulli edges to an existing configuration.
pub fn sample_edges<T: Real>(
    config: LatentConfiguration<T>,
    model: &ModelSpec<T>,
    link: &LinkFunction<T>,
    seed: u64,
    opts: EdgeOptions,
) -> Result<GraphSample<T>> {
    let adjacency = sample_adjacency(&config, link, seed, opts)?;
    Ok(GraphSample { adjacency, config, link: link.clone(), model: model.clone(), seed })
}

/// Sparse-graphon graph: Gaussian positions, link evaluated at size `n`.
pub fn sample_sparse_graphon<T: Real>(
    n: usize,
    d: usize,
    sigma2: T,
    link: &LinkFunction<T>,
    seed: u64,
) -> Result<GraphSample<T>> {
    generate(&ModelSpec::SparseGraphon { d, sigma2 }, link, n, seed, EdgeOptions::default())
}

/// The subgraph of nodes that have arrived by time `t`, in arrival order.
pub fn restrict_to_window<T: Real>(graph: &GraphSample<T>, t: T) -> Result<GraphSample<T>> {
    if !(t > T::zero()) {
        return domain(format!("restriction time must be positive, got {t}"));
    }
    Ok(restrict_leading(graph, graph.config.count_by(t)))
}

/// The subgraph on the first `k` nodes.
pub fn restrict_leading<T: Real>(graph: &GraphSample<T>, k: usize) -> GraphSample<T> {
    GraphSample {
        adjacency: graph.adjacency.leading(k),
        config: graph.config.leading(k),
        link: graph.link.clone(),
        model: graph.model.clone(),
        seed: graph.seed,
    }
}
