//! Link functions, window schedules, regularity bounds and link diagnostics.

pub mod diagnostics;
pub mod link;
pub mod regularity;
pub mod spline;
pub mod window;

pub use diagnostics::{alpha_beta_diagnostics, AlphaBeta, GridSpec};
pub use link::{Kernel, LinkFunction, LinkKind};
pub use regularity::RegularityBound;
pub use window::{WindowGeometry, WindowSchedule};
