//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::tol;

/// Numerical rank: singular values above `tol::RANK_REL × σ_max`.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol::RANK_REL * max).count()
}

/// Orthonormal basis (as columns) of the null space of `a`, which has `d` columns.
pub fn null_space(a: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    if a.nrows() == 0 {
        return DMatrix::identity(d, d);
    }
    // Pad to square so the SVD returns a full set of right singular vectors.
    let k = a.nrows().max(d);
    let mut padded = DMatrix::zeros(k, d);
    padded.view_mut((0, 0), (a.nrows(), d)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = (tol::RANK_REL * max).max(1e-14);
    let cols: Vec<DVector<f64>> = (0..v_t.nrows())
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix in ascending order, with matching eigenvector columns.
pub fn sym_eigen_sorted(s: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(s.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &idx.iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Solves a square system with partial-pivoting LU, `None` when singular.
pub fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    let lu = a.clone().lu();
    // LU::solve only fails on exact zero pivots; reject near-singular ones too.
    let u = lu.u();
    let scale = a.amax().max(1e-300);
    if u.diagonal().iter().any(|p| p.abs() <= 1e-13 * scale) {
        return None;
    }
    lu.solve(b)
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, tol::RANK_REL * max.max(1e-300))
        .expect("u and v_t were computed")
}
