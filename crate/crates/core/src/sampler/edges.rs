//! Bernoulli edge generation with per-dyad random substreams.

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{Kernel, LinkFunction};
use crate::sampler::adjacency::Adjacency;
use crate::sampler::config::LatentConfiguration;
use crate::seed::{derive, dyad_uniform, tag};
use crate::Real;

#[derive(Clone, Copy, Debug, Default)]
pub struct EdgeOptions {
    /// Skip dyads whose link probability is below this value. Off by default.
    pub prune_below: Option<f64>,
}

/// Seed of the dyad substreams for a graph with the given seed.
pub fn edge_seed(seed: u64) -> u64 {
    derive(seed, &[tag::EDGES])
}

struct PairScan<'a, T: Real> {
    rows: Vec<T>,
    d: usize,
    kern: Kernel<'a, T>,
    cutoff_sq: Option<T>,
    edge_seed: u64,
}

impl<'a, T: Real> PairScan<'a, T> {
    fn new(config: &LatentConfiguration<T>, link: &'a LinkFunction<T>, seed: u64, opts: EdgeOptions) -> Result<Self> {
        let kern = link.kernel(Some(config.len().max(1)))?;
        let cutoff_sq = match opts.prune_below {
            Some(thr) if thr > 0.0 && T::lit(thr) < kern.max_value() => {
                let r = kern.inverse(T::lit(thr))?;
                Some(r * r)
            }
            _ => None,
        };
        Ok(Self { rows: config.rows_flat(), d: config.dim(), kern, cutoff_sq, edge_seed: edge_seed(seed) })
    }

    #[inline]
    fn dist_sq(&self, i: usize, j: usize) -> T {
        let a = &self.rows[i * self.d..(i + 1) * self.d];
        let b = &self.rows[j * self.d..(j + 1) * self.d];
        let mut s = T::zero();
        for k in 0..self.d {
            let diff = a[k] - b[k];
            s += diff * diff;
        }
        s
    }

    #[inline]
    fn edge(&self, i: usize, j: usize) -> bool {
        let dsq = self.dist_sq(i, j);
        if let Some(c) = self.cutoff_sq {
            if dsq > c {
                return false;
            }
        }
        let p = self.kern.value(dsq.sqrt()).as_f64();
        dyad_uniform(self.edge_seed, i, j) < p
    }

    /// Neighbours `j > i` of node `i`.
    fn upper_row(&self, i: usize, n: usize) -> Vec<u32> {
        ((i + 1)..n).filter(|&j| self.edge(i, j)).map(|j| j as u32).collect()
    }
}

/// Adjacency for `config` under `link`. Dyad `{i, j}` uses the uniform
/// `dyad_uniform(edge_seed(seed), i, j)`, so the result does not depend on
/// how rows are scheduled across workers.
pub fn sample_adjacency<T: Real>(
    config: &LatentConfiguration<T>,
    link: &LinkFunction<T>,
    seed: u64,
    opts: EdgeOptions,
) -> Result<Adjacency> {
    let n = config.len();
    let scan = PairScan::new(config, link, seed, opts)?;
    let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|i| scan.upper_row(i, n)).collect();
    let mut adj = Adjacency::empty(n);
    for (i, row) in rows.into_iter().enumerate() {
        for j in row {
            adj.set(i, j as usize, true);
        }
    }
    Ok(adj)
}

/// Number of edges `sample_adjacency` would produce, without storing them.
pub fn count_edges<T: Real>(
    config: &LatentConfiguration<T>,
    link: &LinkFunction<T>,
    seed: u64,
    opts: EdgeOptions,
) -> Result<usize> {
    let n = config.len();
    let scan = PairScan::new(config, link, seed, opts)?;
    Ok((0..n).into_par_iter().map(|i| ((i + 1)..n).filter(|&j| scan.edge(i, j)).count()).sum())
}

/// Whether the single dyad `{i, j}` is an edge.
pub fn dyad_edge<T: Real>(config: &LatentConfiguration<T>, link: &LinkFunction<T>, seed: u64, i: usize, j: usize) -> Result<bool> {
    let scan = PairScan::new(config, link, seed, EdgeOptions::default())?;
    Ok(scan.edge(i, j))
}
