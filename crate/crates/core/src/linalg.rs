//! Dense complex matrix helpers shared by the decomposition and detection code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    frobenius_sq(a).sqrt()
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

/// Hermitian eigendecomposition with eigenvalues sorted non-increasing.
///
/// Only the Hermitian part of `a` is used. Column `k` of the returned matrix is the
/// unit-norm eigenvector belonging to the `k`-th eigenvalue.
pub fn hermitian_eig_desc(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Singular values, non-increasing.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Ratio of extreme singular values; `f64::INFINITY` when the smallest one vanishes
/// relative to machine precision.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) => {
            if max == 0.0 || min <= max * f64::EPSILON {
                f64::INFINITY
            } else {
                max / min
            }
        }
        _ => f64::INFINITY,
    }
}

/// `ln |det A|` from an LU factorisation; `-inf` for an exactly singular matrix.
pub fn log_abs_det(a: &CMatrix) -> f64 {
    let lu = a.clone().lu();
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].norm().ln()).sum()
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().solve(b)
}

/// Numerical rank: number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    let Some(&max) = sv.first() else { return 0 };
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_is_sorted_and_reconstructs() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(2.0, 0.0), c64(0.5, 0.5), c64(0.0, -1.0),
                c64(0.5, -0.5), c64(3.0, 0.0), c64(0.25, 0.0),
                c64(0.0, 1.0), c64(0.25, 0.0), c64(1.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eig_desc(&a);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(3, vals.iter().map(|&v| c64(v, 0.0))));
        let rec = &vecs * diag * vecs.adjoint();
        assert!(frobenius(&(rec - a)) < 1e-12);
    }

    #[test]
    fn condition_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(100.0, 0.0), c64(1.0, 0.0)]));
        assert!((condition_number(&a) - 100.0).abs() < 1e-12);
        assert_eq!(condition_number(&CMatrix::identity(4, 4)), 1.0);
        assert!(condition_number(&CMatrix::zeros(2, 2)).is_infinite());
    }

    #[test]
    fn log_det_matches_product() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(2.0, 0.0), c64(0.0, 3.0)]));
        assert!((log_abs_det(&a) - 6f64.ln()).abs() < 1e-14);
    }
}
