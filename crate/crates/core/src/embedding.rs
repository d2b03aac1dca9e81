//! Double-centering, classical MDS, Procrustes alignment and the centered
//! Gram eigenvalues of a configuration.

use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::Real;

/// Optimal isometry mapping `A` onto `B`: `A·T − 1qᵀ ≈ B`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentResult<T: Real> {
    pub rotation: DMatrix<T>,
    pub translation: RowDVector<T>,
    /// `‖A·T − 1qᵀ − B‖²_F` at the returned `(T, q)`.
    pub error: T,
}

/// `C·M·C` with `C = I − 11ᵀ/n`.
pub fn double_center<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "double_center needs a square matrix");
    if n == 0 {
        return m.clone();
    }
    let nt = T::count(n);
    let row_means: Vec<T> = (0..n).map(|i| m.row(i).sum() / nt).collect();
    let col_means: Vec<T> = (0..n).map(|j| m.column(j).sum() / nt).collect();
    let grand = row_means.iter().fold(T::zero(), |a, &b| a + b) / nt;
    DMatrix::from_fn(n, n, |i, j| m[(i, j)] - row_means[i] - col_means[j] + grand)
}

fn column_means<T: Real>(z: &DMatrix<T>) -> RowDVector<T> {
    let n = T::count(z.nrows().max(1));
    RowDVector::from_fn(z.ncols(), |_, k| z.column(k).sum() / n)
}

fn centered<T: Real>(z: &DMatrix<T>) -> DMatrix<T> {
    let mu = column_means(z);
    let mut c = z.clone();
    for mut row in c.row_iter_mut() {
        row -= &mu;
    }
    c
}

/// Eigenpairs of a symmetric matrix ordered by descending eigenvalue.
fn sorted_eigen<T: Real>(m: DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Classical MDS: positions `V·Λ^{1/2}` from the top-`d` eigenpairs of
/// `−½·C·D·C`. Negative eigenvalues within `1e-8·‖D‖_F` are clipped to 0;
/// larger ones are rejected.
pub fn classical_mds<T: Real>(d_sq: &DMatrix<T>, d: usize) -> Result<DMatrix<T>> {
    let n = d_sq.nrows();
    if n != d_sq.ncols() {
        return Err(Error::Usage(format!("distance matrix must be square, got {}×{}", n, d_sq.ncols())));
    }
    if d == 0 {
        return Err(Error::Usage("embedding dimension must be at least 1".into()));
    }
    let mut out = DMatrix::zeros(n, d);
    if n == 0 {
        return Ok(out);
    }
    let b = double_center(d_sq) * T::lit(-0.5);
    let (values, vectors) = sorted_eigen(b);
    let tol = T::lit(1e-8) * d_sq.norm();
    for k in 0..d.min(n) {
        let mut lam = values[k];
        if lam < T::zero() {
            if -lam > tol {
                return Err(Error::NonEuclidean(format!(
                    "eigenvalue {k} of the centered Gram form is {lam}, below tolerance -{tol}"
                )));
            }
            lam = T::zero();
        }
        let s = lam.sqrt();
        for i in 0..n {
            out[(i, k)] = vectors[(i, k)] * s;
        }
    }
    Ok(out)
}

/// Orthogonal Procrustes with translation, reflections allowed.
pub fn procrustes_align<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<AlignmentResult<T>> {
    if a.shape() != b.shape() {
        return Err(Error::Usage(format!("shape mismatch: {:?} vs {:?}", a.shape(), b.shape())));
    }
    let d = a.ncols();
    let (ma, mb) = (column_means(a), column_means(b));
    let (ac, bc) = (centered(a), centered(b));
    let cross = ac.transpose() * &bc;
    let svd = SVD::new(cross, true, true);
    let mut u = svd.u.expect("left factor requested");
    let mut v_t = svd.v_t.expect("right factor requested");
    // nalgebra returns singular values in descending order; fix the sign of
    // each pair so the largest-magnitude entry of the left column is positive.
    for k in 0..u.ncols() {
        let col = u.column(k);
        let pivot = col.iter().copied().fold(T::zero(), |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < T::zero() {
            u.column_mut(k).neg_mut();
            v_t.row_mut(k).neg_mut();
        }
    }
    let rotation = if d == 0 { DMatrix::zeros(0, 0) } else { &u * &v_t };
    let translation = &ma * &rotation - &mb;
    let error = alignment_error(a, b, &rotation, &translation);
    Ok(AlignmentResult { rotation, translation, error })
}

/// `‖A·T − 1qᵀ − B‖²_F`.
pub fn alignment_error<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, t: &DMatrix<T>, q: &RowDVector<T>) -> T {
    let mut r = a * t - b;
    for mut row in r.row_iter_mut() {
        row -= q;
    }
    r.norm_squared()
}

/// The `d` non-trivial eigenvalues of `C·Z·Zᵀ·C`, descending, from the
/// `d×d` Gram matrix of the centered positions.
pub fn top_eigenvalues<T: Real>(z: &DMatrix<T>) -> Vec<T> {
    let c = centered(z);
    let gram = c.transpose() * &c;
    let (values, _) = sorted_eigen(gram);
    values.into_iter().map(|v| v.max(T::zero())).collect()
}

/// Full spectrum of `C·Z·Zᵀ·C` (n×n). Only meant for small checks.
pub fn centered_gram_spectrum<T: Real>(z: &DMatrix<T>) -> Vec<T> {
    let c = centered(z);
    sorted_eigen(&c * c.transpose()).0
}

/// Column means as a plain vector.
pub fn centroid<T: Real>(z: &DMatrix<T>) -> DVector<T> {
    column_means(z).transpose()
}
