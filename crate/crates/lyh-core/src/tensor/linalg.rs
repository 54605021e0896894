//! Double-precision eigen solvers bridged to `nalgebra`.

use crate::scalar::C64;
use crate::tensor::matrix::CxMatrix;
use nalgebra::DMatrix;

pub type CMat = CxMatrix<f64>;

fn to_na(a: &CMat) -> DMatrix<C64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

fn from_na(a: &DMatrix<C64>) -> CMat {
    CxMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigen-decomposition of a Hermitian matrix (the strictly Hermitian part is used).
/// Eigenvalues ascending; column `k` of the returned matrix is the `k`-th eigenvector.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.rows();
    if n == 0 {
        return (Vec::new(), CxMatrix::zeros(0, 0));
    }
    let h = DMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CxMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    (vals, vecs)
}

pub fn min_eigen(a: &CMat) -> (f64, Vec<C64>) {
    let (vals, vecs) = hermitian_eigen(a);
    let n = a.rows();
    (vals[0], (0..n).map(|i| vecs[(i, 0)]).collect())
}

/// Minimizes `uᴴ H u / uᴴ N u` over `u` outside the kernel of the PSD matrix `N`.
/// Returns `None` when `N` vanishes numerically.
pub fn min_generalized(h: &CMat, n: &CMat, rel_cut: f64) -> Option<(f64, Vec<C64>)> {
    let dim = h.rows();
    let (nv, nvec) = hermitian_eigen(n);
    let top = nv.iter().cloned().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return None;
    }
    let keep: Vec<usize> = (0..dim).filter(|&k| nv[k] > rel_cut * top).collect();
    let r = keep.len();
    // T = U_r diag(1/sqrt(s)), reduced H' = Tᴴ H T.
    let t = CxMatrix::from_fn(dim, r, |i, k| nvec[(i, keep[k])] / nv[keep[k]].sqrt());
    let reduced = &(&t.adjoint() * h) * &t;
    let (lam, y) = min_eigen(&reduced);
    let u = t.mul_vec(&y);
    Some((lam, u))
}

/// Solves `A x = b` for Hermitian `A` via the eigen pseudo-inverse; the flag
/// reports whether any eigenvalue was cut as singular.
pub fn hermitian_pinv_solve(a: &CMat, b: &[C64], rel_cut: f64) -> (Vec<C64>, bool) {
    let (vals, vecs) = hermitian_eigen(a);
    let n = a.rows();
    let top = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut singular = false;
    for k in 0..n {
        if vals[k].abs() <= rel_cut * top || top == 0.0 {
            singular = true;
            continue;
        }
        let proj: C64 = (0..n).map(|i| vecs[(i, k)].conj() * b[i]).sum();
        for i in 0..n {
            x[i] += vecs[(i, k)] * proj / vals[k];
        }
    }
    (x, singular)
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(a: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(a);
    vals.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Orthonormalizes the columns of an `n×k` matrix (thin QR, Q factor).
pub fn orthonormalize(a: &CMat) -> CMat {
    let qr = to_na(a).qr();
    from_na(&qr.q())
}

/// Determinant of a small square matrix by LU.
pub fn det(a: &CMat) -> C64 {
    if a.rows() == 0 {
        return C64::new(1.0, 0.0);
    }
    to_na(a).determinant()
}
