use crate::error::{usage, Result};

/// Symmetric binary adjacency matrix with zero diagonal, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    cells: Vec<u8>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Self { n, cells: vec![0; n * n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(n);
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return usage(format!("invalid edge ({i}, {j}) for {n} nodes"));
            }
            a.set(i, j, true);
        }
        Ok(a)
    }

    /// Builds from a dense 0/1 matrix, checking symmetry and the diagonal.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut a = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return usage("adjacency matrix must be square");
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return usage("adjacency entries must be 0 or 1");
                }
                if v != rows[j][i] {
                    return usage("adjacency matrix must be symmetric");
                }
                if i == j && v != 0 {
                    return usage("adjacency diagonal must be zero");
                }
                a.cells[i * n + j] = v;
            }
        }
        Ok(a)
    }

    pub fn complete(n: usize) -> Self {
        let mut a = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                a.set(i, j, true);
            }
        }
        a
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j] != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i != j || !v);
        let b = v as u8;
        self.cells[i * self.n + j] = b;
        self.cells[j * self.n + i] = b;
    }

    /// Row `i` as 0/1 bytes.
    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.cells[i * self.n..(i + 1) * self.n]
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).filter(move |&j| self.get(i, j)).map(move |j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.cells.iter().map(|&c| c as usize).sum::<usize>() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&c| c as usize).sum()
    }

    /// The leading `k × k` sub-matrix.
    pub fn leading(&self, k: usize) -> Self {
        let k = k.min(self.n);
        let mut out = Self::empty(k);
        for i in 0..k {
            out.cells[i * k..(i + 1) * k].copy_from_slice(&self.cells[i * self.n..i * self.n + k]);
        }
        out
    }

    /// Upper-triangle pattern of the leading `k` nodes packed into an
    /// integer, bit `b` for the `b`-th pair in row-major order.
    pub fn pattern_code(&self, k: usize) -> u64 {
        let mut code = 0u64;
        let mut bit = 0;
        for i in 0..k {
            for j in (i + 1)..k {
                if self.get(i, j) {
                    code |= 1 << bit;
                }
                bit += 1;
            }
        }
        code
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_construction() {
        let a = Adjacency::from_edges(4, &[(0, 1), (3, 2)]).unwrap();
        assert!(a.get(1, 0) && a.get(2, 3) && !a.get(0, 2));
        assert_eq!(a.edges().collect::<Vec<_>>(), vec![(0, 1), (2, 3)]);
        assert_eq!(a.edge_count(), 2);
        assert!(Adjacency::from_edges(3, &[(1, 1)]).is_err());
        assert!(Adjacency::from_edges(3, &[(1, 3)]).is_err());
    }

    #[test]
    fn dense_validation() {
        assert!(Adjacency::from_dense(&[vec![0, 1], vec![0, 0]]).is_err());
        assert!(Adjacency::from_dense(&[vec![1, 0], vec![0, 0]]).is_err());
        let a = Adjacency::from_dense(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(a.edge_count(), 1);
    }

    #[test]
    fn leading_block_and_pattern() {
        let a = Adjacency::from_edges(5, &[(0, 1), (1, 2), (0, 4), (3, 4)]).unwrap();
        let l = a.leading(3);
        assert_eq!(l.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        // pairs (0,1), (0,2), (1,2) -> bits 0 and 2
        assert_eq!(a.pattern_code(3), 0b101);
        assert_eq!(a.leading(10), a);
    }
}
