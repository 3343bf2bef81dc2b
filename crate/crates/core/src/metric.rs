//! The Bergman metric g_{jk̄} = ∂_j∂̄_k log K(z,z), its inverse and the
//! Hermitian square root of the inverse.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::KernelHandle;
use crate::linalg::{hermitian_defect, hermitian_eigen, hermitian_part, sesquilinear, spectral, CMatrix};
use crate::point::{check_dim, fmt_coords, CPoint, TangentVector};

/// Metric tensor at a point, with G⁻¹ and h = (G⁻¹)^{1/2}.
#[derive(Clone, Debug)]
pub struct MetricTensor {
    pub point: CPoint,
    pub matrix: CMatrix,
    pub inverse: CMatrix,
    pub sqrt_inverse: CMatrix,
    pub eigenvalues: Vec<f64>,
}

impl MetricTensor {
    /// Builds the tensor from a Hermitian positive-definite matrix.
    pub fn from_matrix(point: CPoint, matrix: CMatrix) -> Result<Self> {
        let n = point.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        let scale = matrix.norm();
        let defect = hermitian_defect(&matrix);
        if defect > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Inconsistent(format!(
                "metric at {point} is not Hermitian (defect {defect:e})"
            )));
        }
        let matrix = hermitian_part(&matrix);
        let (values, u) = hermitian_eigen(&matrix);
        let min = values[0];
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                point: point.to_string(),
                min_eigenvalue: min,
            });
        }
        let inverse = spectral(&values, &u, |x| 1.0 / x);
        let sqrt_inverse = spectral(&values, &u, |x| 1.0 / x.sqrt());
        Ok(Self {
            point,
            matrix,
            inverse,
            sqrt_inverse,
            eigenvalues: values,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Σ g_{jk̄} X_j conj(Y_k) for raw component vectors.
    pub fn pair_components(&self, x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(sesquilinear(&self.matrix, x, y))
    }

    /// g(X, X) for a raw component vector.
    pub fn norm_sqr(&self, x: &[Complex64]) -> Result<f64> {
        Ok(self.pair_components(x, x)?.re)
    }
}

/// Metric tensor of the kernel at an interior point.
pub fn metric_at(kernel: &KernelHandle, z: &CPoint) -> Result<MetricTensor> {
    kernel.domain().require_interior(z)?;
    let n = kernel.dim();
    let jet = kernel.jet(z, z)?;
    let k = kernel.diagonal(z)?;
    let g = CMatrix::from_fn(n, n, |j, l| {
        (jet.mixed_at(j, l) * k - jet.dz[j] * jet.dxibar[l]) / (k * k)
    });
    MetricTensor::from_matrix(z.clone(), g)
}

/// g(X, Y) = Σ g_{jk̄} X_j conj(Y_k).
pub fn metric_pair(g: &MetricTensor, x: &TangentVector, y: &TangentVector) -> Result<Complex64> {
    for v in [x, y] {
        if v.base != g.point {
            return Err(Error::BaseMismatch {
                expected: g.point.to_string(),
                found: v.base.to_string(),
            });
        }
    }
    g.pair_components(&x.dir, &y.dir)
}

/// Squared norm Σ g^{k̄j} η_j conj(η_k) of the (1,0)-form with components η_j,
/// i.e. sup over Y of |η(Y)|²/g(Y,Y).
pub fn oneform_norm(g: &MetricTensor, eta: &[Complex64]) -> Result<f64> {
    check_dim(g.dim(), eta.len())?;
    let n = eta.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += eta[j].conj() * g.inverse[(j, k)] * eta[k];
        }
    }
    Ok(acc.re.max(0.0))
}

/// Max entrywise difference between [`metric_at`] and a central-difference
/// Hessian of log K(z,z) with step `h` in each real coordinate. The stencil
/// reaches 2h from `z`.
pub fn finite_difference_check(kernel: &KernelHandle, z: &CPoint, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let n = kernel.dim();
    check_dim(n, z.dim())?;
    let exact = metric_at(kernel, z)?;
    let dom = kernel.domain();
    // Real coordinates: index 2j is Re z_j, 2j+1 is Im z_j.
    let shifted = |steps: &[(usize, f64)]| -> Result<f64> {
        let mut p: Vec<Complex64> = z.to_vec();
        for &(a, s) in steps {
            if a % 2 == 0 {
                p[a / 2].re += s * h;
            } else {
                p[a / 2].im += s * h;
            }
        }
        if !dom.contains_unchecked(&p) {
            return Err(Error::OutsideDomain {
                point: fmt_coords(&p),
                domain: dom.to_string(),
            });
        }
        Ok(kernel.value(&p, &p)?.re.ln())
    };
    // Fourth-order central stencils: truncation is O(h⁴), leaving rounding as
    // the dominant error.
    const W1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let f0 = shifted(&[])?;
    let second = |a: usize, b: usize| -> Result<f64> {
        if a == b {
            let mut acc = -30.0 * f0;
            for (s, w) in [(-2.0, -1.0), (-1.0, 16.0), (1.0, 16.0), (2.0, -1.0)] {
                acc += w * shifted(&[(a, s)])?;
            }
            Ok(acc / (12.0 * h * h))
        } else {
            let mut acc = 0.0;
            for (sa, wa) in W1 {
                for (sb, wb) in W1 {
                    acc += wa * wb * shifted(&[(a, sa), (b, sb)])?;
                }
            }
            Ok(acc / (144.0 * h * h))
        }
    };
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            // ∂_j∂̄_k = ¼(∂x_j − i∂y_j)(∂x_k + i∂y_k)
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            let fd = if j == k {
                Complex64::new(0.25 * (second(xj, xj)? + second(yj, yj)?), 0.0)
            } else {
                Complex64::new(
                    0.25 * (second(xj, xk)? + second(yj, yk)?),
                    0.25 * (second(xj, yk)? - second(yj, xk)?),
                )
            };
            worst = worst.max((fd - exact.matrix[(j, k)]).norm());
        }
    }
    Ok(worst)
}
