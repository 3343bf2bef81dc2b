//! Hermitian matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// (A + A*)/2.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Frobenius norm of A − A*.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

/// Eigenvalues (ascending) and matching unit eigenvectors (columns) of the
/// Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(f64::NAN)
}

/// U f(Λ) U* for the Hermitian part of `a`.
pub fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, u) = hermitian_eigen(a);
    spectral(&values, &u, f)
}

pub(crate) fn spectral(values: &[f64], u: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = u.clone();
    for (c, &lam) in values.iter().enumerate() {
        let s = Complex64::new(f(lam), 0.0);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    scaled * u.adjoint()
}

/// x^T A conj(y).
pub fn sesquilinear(a: &CMatrix, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let n = x.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..n {
            row += a[(j, k)] * y[k].conj();
        }
        acc += x[j] * row;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_root_of_inverse() {
        let a = CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(2.0, 0.0)]);
        let inv = hermitian_function(&a, |x| 1.0 / x);
        let h = hermitian_function(&a, |x| 1.0 / x.sqrt());
        let id = &a * &inv;
        assert!((id - CMatrix::identity(2, 2)).norm() < 1e-13);
        assert!((&h * &h - &inv).norm() < 1e-13);
        assert!(hermitian_defect(&h) < 1e-14);
    }

    #[test]
    fn eigenvalues_sorted() {
        let a = CMatrix::from_row_slice(2, 2, &[c(5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let (v, _) = hermitian_eigen(&a);
        assert_eq!(v, vec![1.0, 5.0]);
    }
}
