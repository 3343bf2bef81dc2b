//! Gradient norms F(w,ζ) = |∂_w log P(w,ζ)|²_g, the representative map, and
//! the boundary values of F on balls and polydiscs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::kernel::KernelHandle;
use crate::maps::MapSpec;
use crate::metric::{metric_at, oneform_norm, MetricTensor};
use crate::point::{check_dim, cvec, CPoint};
use crate::stats::BerezinDensity;

/// Radius used in place of a boundary point for backends that cannot evaluate there.
pub const BOUNDARY_PULLBACK: f64 = 1.0 - 1e-4;

/// Tolerance for |ξ₀_j| = 1 when validating boundary points.
const BOUNDARY_TOL: f64 = 1e-12;

/// F at many ζ for a fixed w, with the metric and diagonal terms computed once.
pub struct GradNormAt {
    density: BerezinDensity,
    metric: MetricTensor,
    diag: crate::stats::DiagonalLogDerivative,
}

impl GradNormAt {
    pub fn new(kernel: &KernelHandle, w: &CPoint) -> Result<Self> {
        let metric = metric_at(kernel, w)?;
        let density = BerezinDensity::new(kernel.clone());
        let diag = density.diagonal_log_derivative(w)?;
        Ok(Self {
            density,
            metric,
            diag,
        })
    }

    pub fn metric(&self) -> &MetricTensor {
        &self.metric
    }

    /// Components ∂_{w_j} log P(w,ζ).
    pub fn gradient(&self, zeta: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.density.grad_log_density(&self.diag, zeta)?.1.to_vec())
    }

    pub fn norm(&self, zeta: &[Complex64]) -> Result<f64> {
        oneform_norm(&self.metric, &self.gradient(zeta)?)
    }
}

/// F(w,ζ) = |∂_w log P(w,ζ)|²_{g(w)}.
pub fn grad_logp_norm(kernel: &KernelHandle, w: &CPoint, zeta: &[Complex64]) -> Result<f64> {
    check_dim(kernel.dim(), zeta.len())?;
    GradNormAt::new(kernel, w)?.norm(zeta)
}

/// Closed form of F on the unit ball of ℂⁿ:
/// (n+1)[|w|² + (1−|w|²)(1 − (1−|ζ|²)/|1−⟨w,ζ⟩|²)].
pub fn ball_grad_norm_closed(w: &[Complex64], zeta: &[Complex64]) -> f64 {
    let n = w.len() as f64;
    let w2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    let z2: f64 = zeta.iter().map(|c| c.norm_sqr()).sum();
    let inner: Complex64 = w.iter().zip(zeta).map(|(a, b)| a * b.conj()).sum();
    (n + 1.0) * (w2 + (1.0 - w2) * (1.0 - (1.0 - z2) / (1.0 - inner).norm_sqr()))
}

/// Closed form of F on the polydisc: the sum of the disc values per coordinate.
pub fn polydisc_grad_norm_closed(w: &[Complex64], zeta: &[Complex64]) -> f64 {
    w.iter()
        .zip(zeta)
        .map(|(a, b)| ball_grad_norm_closed(&[*a], &[*b]))
        .sum()
}

/// Image of ξ under the representative map at z₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepImage {
    pub base: CPoint,
    pub target: CPoint,
    #[serde(with = "cvec")]
    pub b: Vec<Complex64>,
}

impl RepImage {
    pub fn norm_sqr(&self) -> f64 {
        self.b.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Representative map at a fixed base point, with h = (g⁻¹)^{1/2} and the
/// diagonal term computed once.
pub struct Representative {
    kernel: KernelHandle,
    base: CPoint,
    metric: MetricTensor,
    diag_term: Vec<Complex64>,
}

impl Representative {
    pub fn new(kernel: &KernelHandle, z0: &CPoint) -> Result<Self> {
        let metric = metric_at(kernel, z0)?;
        let (k, dxb) = kernel.grad_xibar(z0, z0)?;
        Ok(Self {
            kernel: kernel.clone(),
            base: z0.clone(),
            metric,
            diag_term: dxb.iter().map(|d| d / k).collect(),
        })
    }

    /// b_j(ξ) = Σ_k h^{k̄j}(z₀) [∂_{z̄_k} log K(ξ,z) − ∂_{z̄_k} log K(z,z)] at z = z₀.
    pub fn image(&self, xi: &[Complex64]) -> Result<RepImage> {
        check_dim(self.base.dim(), xi.len())?;
        let (k, dxb) = self.kernel.grad_xibar(xi, &self.base)?;
        if k.norm_sqr() == 0.0 {
            return Err(Error::KernelZero {
                z: crate::point::fmt_coords(xi),
                xi: self.base.to_string(),
            });
        }
        let v: Vec<Complex64> = dxb
            .iter()
            .zip(&self.diag_term)
            .map(|(d, t)| d / k - t)
            .collect();
        let h = &self.metric.sqrt_inverse;
        let n = v.len();
        let b = (0..n).map(|j| (0..n).map(|l| h[(l, j)] * v[l]).sum()).collect();
        Ok(RepImage {
            base: self.base.clone(),
            target: CPoint::from_slice(xi),
            b,
        })
    }
}

pub fn representative_map(kernel: &KernelHandle, z0: &CPoint, xi: &[Complex64]) -> Result<RepImage> {
    Representative::new(kernel, z0)?.image(xi)
}

/// |F(z₀,ξ) − |rep_{z₀}(ξ)|²|.
pub fn rep_equality_check(kernel: &KernelHandle, z0: &CPoint, xi: &[Complex64]) -> Result<f64> {
    let f = grad_logp_norm(kernel, z0, xi)?;
    let b = representative_map(kernel, z0, xi)?;
    Ok((f - b.norm_sqr()).abs())
}

/// |F₁(z,ξ) − F₂(φ(z),φ(ξ))| for a certified biholomorphism φ (coordinatewise
/// Möbius map of a polydisc onto itself).
pub fn invariance_check(
    phi: &MapSpec,
    source_kernel: &KernelHandle,
    target_kernel: &KernelHandle,
    z: &CPoint,
    xi: &[Complex64],
) -> Result<f64> {
    phi.as_mobius_product()?;
    let lhs = grad_logp_norm(source_kernel, z, xi)?;
    let fz = phi.image_inside(z)?;
    let fxi = phi.image_inside(xi)?;
    let rhs = grad_logp_norm(target_kernel, &fz, &fxi)?;
    Ok((lhs - rhs).abs())
}

/// Result of evaluating F(z, ξ₀) over interior points for a boundary ξ₀.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryScan {
    pub domain: String,
    pub xi0: CPoint,
    /// The point actually used in the second slot (pulled inside for
    /// backends that cannot evaluate on the boundary).
    pub xi_used: CPoint,
    pub expected: f64,
    pub values: Vec<f64>,
    pub max_deviation: f64,
    /// True when ξ was pulled inside, so the scan is a trend, not an identity.
    pub approximate: bool,
}

/// Value of F on the boundary set: n+1 for the ball, 2n for the polydisc
/// (distinguished boundary).
pub fn boundary_value(domain: &DomainSpec) -> Result<f64> {
    match domain {
        DomainSpec::Ball { dim } => Ok(*dim as f64 + 1.0),
        DomainSpec::Polydisc { dim } => Ok(2.0 * *dim as f64),
        DomainSpec::Product(_) if domain.is_polydisc_like() => Ok(2.0 * domain.dim() as f64),
        other => Err(Error::Unsupported {
            op: "boundary_constancy_scan",
            domain: other.to_string(),
        }),
    }
}

fn on_boundary_set(domain: &DomainSpec, xi0: &[Complex64]) -> bool {
    match domain {
        DomainSpec::Ball { .. } => {
            let r: f64 = xi0.iter().map(|c| c.norm_sqr()).sum();
            (r.sqrt() - 1.0).abs() <= BOUNDARY_TOL
        }
        _ => xi0.iter().all(|c| (c.norm() - 1.0).abs() <= BOUNDARY_TOL),
    }
}

/// Evaluates F(z, ξ₀) at every grid point; on balls F ≡ n+1 and on polydiscs
/// F ≡ 2n for ξ₀ on the (distinguished) boundary.
pub fn boundary_constancy_scan(
    kernel: &KernelHandle,
    xi0: &CPoint,
    grid: &[CPoint],
) -> Result<BoundaryScan> {
    let domain = kernel.domain();
    check_dim(domain.dim(), xi0.dim())?;
    let expected = boundary_value(domain)?;
    if !on_boundary_set(domain, xi0) {
        return Err(Error::NotOnBoundary {
            point: xi0.to_string(),
            domain: domain.to_string(),
        });
    }
    let approximate = !kernel.is_closed_form();
    let xi_used = if approximate {
        xi0.scaled(BOUNDARY_PULLBACK)
    } else {
        xi0.clone()
    };
    let mut values = Vec::with_capacity(grid.len());
    for z in grid {
        values.push(grad_logp_norm(kernel, z, &xi_used)?);
    }
    let max_deviation = values
        .iter()
        .map(|v| (v - expected).abs())
        .fold(0.0, f64::max);
    Ok(BoundaryScan {
        domain: domain.to_string(),
        xi0: xi0.clone(),
        xi_used,
        expected,
        values,
        max_deviation,
        approximate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::closed_form_kernel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn center_against_itself() {
        let k = closed_form_kernel(&DomainSpec::disc()).unwrap();
        let o = CPoint::origin(1);
        assert!(grad_logp_norm(&k, &o, &o).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ball_closed_form() {
        let k = closed_form_kernel(&DomainSpec::ball(2).unwrap()).unwrap();
        let w = CPoint::new(vec![c(0.2, -0.3), c(0.1, 0.4)]);
        let zeta = [c(-0.5, 0.1), c(0.3, 0.3)];
        let f = grad_logp_norm(&k, &w, &zeta).unwrap();
        assert!((f - ball_grad_norm_closed(&w, &zeta)).abs() < 1e-10);
    }

    #[test]
    fn rep_at_center_is_scaled_identity() {
        let k = closed_form_kernel(&DomainSpec::ball(2).unwrap()).unwrap();
        let xi = [c(0.3, -0.1), c(0.2, 0.5)];
        let b = representative_map(&k, &CPoint::origin(2), &xi).unwrap();
        for (bj, xj) in b.b.iter().zip(xi) {
            assert!((bj - xj * 3f64.sqrt()).norm() < 1e-12);
        }
        let z0 = CPoint::new(vec![c(0.1, 0.2), c(-0.3, 0.0)]);
        assert!(representative_map(&k, &z0, &z0).unwrap().norm_sqr() < 1e-24);
        assert!(rep_equality_check(&k, &z0, &xi).unwrap() < 1e-10);
    }

    #[test]
    fn boundary_values() {
        let k = closed_form_kernel(&DomainSpec::polydisc(2).unwrap()).unwrap();
        let xi0 = CPoint::new(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let grid = vec![CPoint::new(vec![c(0.3, 0.1), c(-0.2, 0.5)]), CPoint::origin(2)];
        let scan = boundary_constancy_scan(&k, &xi0, &grid).unwrap();
        assert!(scan.max_deviation < 1e-10);
        assert!(!scan.approximate);
        let inside = CPoint::new(vec![c(0.5, 0.0), c(0.0, 1.0)]);
        assert!(matches!(
            boundary_constancy_scan(&k, &inside, &grid),
            Err(Error::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn mobius_invariance() {
        let d = DomainSpec::disc();
        let k = closed_form_kernel(&d).unwrap();
        let phi = MapSpec::mobius_product(&[c(0.5, 0.0)]).unwrap();
        let r = invariance_check(&phi, &k, &k, &CPoint::origin(1), &[c(0.3, 0.0)]).unwrap();
        assert!(r < 1e-10);
        let sq = MapSpec::new("square", d.clone(), d, vec![crate::maps::Expr::pow(crate::maps::Expr::var(0), 2)])
            .unwrap();
        assert!(invariance_check(&sq, &k, &k, &CPoint::origin(1), &[c(0.3, 0.0)]).is_err());
    }
}
