//! Projective sparse latent position network models.
//!
//! The crate samples graphs from rectangular latent position models and
//! their exchangeable and sparse-graphon baselines, fits latent positions by
//! restricted maximum likelihood, and runs seeded Monte-Carlo experiments on
//! sparsity, projectivity, learnability, eigenvalue scaling and regularity.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment
//! runners and file formats use.

// `!(x > 0)` is how NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod error;
pub mod experiments;
pub mod io;
pub mod estimator;
pub mod likelihood;
pub mod model;
pub mod sampler;
pub mod scalar;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Link = model::LinkFunction<f64>;
pub type Window = model::WindowSchedule<f64>;
pub type Bound = model::RegularityBound<f64>;
pub type Model = sampler::ModelSpec<f64>;
pub type Configuration = sampler::LatentConfiguration<f64>;
pub type Graph = sampler::GraphSample<f64>;
pub type Alignment = embedding::AlignmentResult<f64>;
pub type Fit = estimator::FitResult<f64>;
pub type Errors = likelihood::LearnabilityErrors<f64>;
