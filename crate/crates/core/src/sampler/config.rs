use nalgebra::DMatrix;

use crate::model::WindowSchedule;
use crate::Real;

/// How a configuration's latent positions were generated.
#[derive(Clone, Debug, PartialEq)]
pub enum Layout<T: Real> {
    Rectangular(WindowSchedule<T>),
    ExchangeableGaussian { sigma2: T },
    SparseGraphon { sigma2: T },
}

/// Latent positions `Z` (n × d), auxiliary coordinates `r` and arrival
/// times `t`, ordered by arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentConfiguration<T: Real> {
    pub(crate) positions: DMatrix<T>,
    pub(crate) aux: Vec<T>,
    pub(crate) arrivals: Vec<T>,
    pub(crate) layout: Layout<T>,
}

impl<T: Real> LatentConfiguration<T> {
    /// Assemble a configuration from parts. Arrivals must be strictly
    /// increasing and every vector must have `positions.nrows()` entries.
    pub fn from_parts(
        positions: DMatrix<T>,
        aux: Vec<T>,
        arrivals: Vec<T>,
        layout: Layout<T>,
    ) -> crate::Result<Self> {
        let n = positions.nrows();
        if aux.len() != n || arrivals.len() != n {
            return crate::error::usage("positions, aux and arrivals must have the same length");
        }
        if arrivals.windows(2).any(|w| !(w[1] > w[0])) {
            return crate::error::usage("arrival times must be strictly increasing");
        }
        if let Layout::Rectangular(w) = &layout {
            if w.dim() != positions.ncols() {
                return crate::error::usage("window dimension does not match positions");
            }
        }
        Ok(Self { positions, aux, arrivals, layout })
    }

    pub fn len(&self) -> usize {
        self.positions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    pub fn positions(&self) -> &DMatrix<T> {
        &self.positions
    }

    pub fn aux(&self) -> &[T] {
        &self.aux
    }

    pub fn arrivals(&self) -> &[T] {
        &self.arrivals
    }

    pub fn layout(&self) -> &Layout<T> {
        &self.layout
    }

    /// Number of nodes that have arrived by time `t`.
    pub fn count_by(&self, t: T) -> usize {
        self.arrivals.partition_point(|&a| a <= t)
    }

    /// The first `k` nodes in arrival order.
    pub fn leading(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            positions: self.positions.rows(0, k).into_owned(),
            aux: self.aux[..k].to_vec(),
            arrivals: self.arrivals[..k].to_vec(),
            layout: self.layout.clone(),
        }
    }

    /// Largest Euclidean norm among the latent positions.
    pub fn max_norm(&self) -> T {
        self.positions
            .row_iter()
            .map(|r| r.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Positions as a row-major buffer, the layout used by the pair loops.
    pub fn rows_flat(&self) -> Vec<T> {
        row_major(&self.positions)
    }
}

pub(crate) fn row_major<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let (n, d) = m.shape();
    let mut out = Vec::with_capacity(n * d);
    for i in 0..n {
        for k in 0..d {
            out.push(m[(i, k)]);
        }
    }
    out
}
