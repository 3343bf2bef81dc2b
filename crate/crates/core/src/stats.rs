//! The Berezin density P(z,ξ) = |K(z,ξ)|²/K(z,z) and moments under the
//! probability measure P(z,·)dV.
//!
//! Every moment is computed on both rules of a [`RefinedRule`]; the fine value
//! is reported and |coarse − fine| is the discretization estimate.

use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelHandle;
use crate::point::{check_dim, fmt_coords, CPoint, Coords, TangentVector};
use crate::quadrature::{pairwise_sum, pairwise_sum_complex, QuadRule, RefinedRule};

/// Nodes whose density falls below this are dropped from moment sums.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Variance real parts below −this are treated as quadrature failure.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-12;

/// A moment with its discretization estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: Complex64,
    /// |value(order) − value(2·order)|.
    pub quad_error_estimate: f64,
    /// Fine-rule nodes skipped because P fell below [`DENSITY_FLOOR`].
    pub skipped: usize,
    /// One-pass E[ZW̄] − E[Z]E[W̄] on the fine rule, for covariances.
    pub naive: Option<Complex64>,
}

impl MomentResult {
    pub fn re(&self) -> f64 {
        self.value.re
    }
}

/// P(z,ξ) and ∂_z log P(z,ξ) over a kernel.
#[derive(Clone, Debug)]
pub struct BerezinDensity {
    kernel: KernelHandle,
}

/// ∂_{z_j} log K(z,z) at a fixed z, reused across many ξ.
#[derive(Clone, Debug)]
pub struct DiagonalLogDerivative {
    pub z: CPoint,
    pub k_zz: f64,
    pub dlog: Coords,
}

impl BerezinDensity {
    pub fn new(kernel: KernelHandle) -> Self {
        Self { kernel }
    }

    pub fn kernel(&self) -> &KernelHandle {
        &self.kernel
    }

    /// |K(z,ξ)|²/K(z,z).
    pub fn density(&self, z: &[Complex64], xi: &[Complex64]) -> Result<f64> {
        let kzz = self.kernel.diagonal(z)?;
        Ok(self.kernel.value(z, xi)?.norm_sqr() / kzz)
    }

    pub fn diagonal_log_derivative(&self, z: &CPoint) -> Result<DiagonalLogDerivative> {
        let (k, dz) = self.kernel.grad_z(z, z)?;
        let k_zz = self.kernel.diagonal(z)?;
        Ok(DiagonalLogDerivative {
            z: z.clone(),
            k_zz,
            dlog: dz.iter().map(|d| d / k.re).collect(),
        })
    }

    /// ∂_{z_j} log P(z,ξ) = ∂_j K(z,ξ)/K(z,ξ) − ∂_j K(z,z)/K(z,z), together with P(z,ξ).
    pub fn grad_log_density(
        &self,
        diag: &DiagonalLogDerivative,
        xi: &[Complex64],
    ) -> Result<(f64, Coords)> {
        let (k, dz) = self.kernel.grad_z(&diag.z, xi)?;
        if k.norm_sqr() == 0.0 {
            return Err(Error::KernelZero {
                z: diag.z.to_string(),
                xi: fmt_coords(xi),
            });
        }
        let p = k.norm_sqr() / diag.k_zz;
        let g = dz.iter().zip(&diag.dlog).map(|(d, l)| d / k - l).collect();
        Ok((p, g))
    }

    /// ∂_X log P(z,ξ) = Σ X_j ∂_{z_j} log P(z,ξ).
    pub fn dlogp(&self, z: &CPoint, x: &TangentVector, xi: &[Complex64]) -> Result<Complex64> {
        check_dim(z.dim(), x.dir.len())?;
        let diag = self.diagonal_log_derivative(z)?;
        self.dlogp_with(&diag, &x.dir, xi)
    }

    pub fn dlogp_with(
        &self,
        diag: &DiagonalLogDerivative,
        x: &[Complex64],
        xi: &[Complex64],
    ) -> Result<Complex64> {
        let (_, g) = self.grad_log_density(diag, xi)?;
        Ok(g.iter().zip(x).map(|(a, b)| a * b).sum())
    }
}

/// Weighted samples of several integrands on one rule: w_i·P(z,ξ_i) and Z_k(ξ_i).
struct Samples {
    mass: Vec<f64>,
    values: Vec<Vec<Complex64>>,
    skipped: usize,
}

pub type Integrand<'a> = &'a (dyn Fn(&[Complex64]) -> Result<Complex64> + Sync);

fn sample(
    p: &BerezinDensity,
    rule: &QuadRule,
    z: &CPoint,
    fns: &[Integrand<'_>],
) -> Result<Samples> {
    let kzz = p.kernel.diagonal(z)?;
    let rows: Vec<Option<(f64, Vec<Complex64>)>> = (0..rule.len())
        .into_par_iter()
        .map(|i| -> Result<Option<(f64, Vec<Complex64>)>> {
            let xi = rule.node(i);
            let dens = p.kernel.value(z, xi)?.norm_sqr() / kzz;
            if dens < DENSITY_FLOOR {
                return Ok(None);
            }
            let mut vals = Vec::with_capacity(fns.len());
            for f in fns {
                let v = f(xi)?;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite {
                        index: i,
                        point: fmt_coords(xi),
                        value: v.to_string(),
                    });
                }
                vals.push(v);
            }
            Ok(Some((rule.weight(i) * dens, vals)))
        })
        .collect::<Result<_>>()?;
    let mut mass = Vec::with_capacity(rows.len());
    let mut values = vec![Vec::with_capacity(rows.len()); fns.len()];
    let mut skipped = 0;
    for row in rows {
        match row {
            Some((m, vals)) => {
                mass.push(m);
                for (col, v) in values.iter_mut().zip(vals) {
                    col.push(v);
                }
            }
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        debug!("skipped {skipped} of {} nodes with P < {DENSITY_FLOOR:e} at z = {z}", rule.len());
    }
    Ok(Samples {
        mass,
        values,
        skipped,
    })
}

impl Samples {
    fn mean(&self, k: usize) -> Complex64 {
        let terms: Vec<Complex64> = self.values[k].iter().zip(&self.mass).map(|(v, m)| v * m).collect();
        pairwise_sum_complex(&terms)
    }

    fn total_mass(&self) -> f64 {
        pairwise_sum(&self.mass)
    }

    /// Two-pass E[(Z−E Z) conj(W−E W)].
    fn centered(&self, a: usize, b: usize) -> Complex64 {
        let ma = self.mean(a);
        let mb = self.mean(b);
        let terms: Vec<Complex64> = (0..self.mass.len())
            .map(|i| (self.values[a][i] - ma) * (self.values[b][i] - mb).conj() * self.mass[i])
            .collect();
        pairwise_sum_complex(&terms)
    }

    fn naive(&self, a: usize, b: usize) -> Complex64 {
        let terms: Vec<Complex64> = (0..self.mass.len())
            .map(|i| self.values[a][i] * self.values[b][i].conj() * self.mass[i])
            .collect();
        pairwise_sum_complex(&terms) - self.mean(a) * self.mean(b).conj()
    }
}

fn refined<F>(rule: &RefinedRule, f: F) -> Result<MomentResult>
where
    F: Fn(&QuadRule) -> Result<(Complex64, usize, Option<Complex64>)>,
{
    let (coarse, _, _) = f(&rule.coarse)?;
    let (fine, skipped, naive) = f(&rule.fine)?;
    Ok(MomentResult {
        value: fine,
        quad_error_estimate: (fine - coarse).norm(),
        skipped,
        naive,
    })
}

/// ∫ P(z,ξ) dV(ξ), which should be 1.
pub fn normalization(p: &BerezinDensity, rule: &RefinedRule, z: &CPoint) -> Result<MomentResult> {
    refined(rule, |r| {
        let s = sample(p, r, z, &[])?;
        Ok((Complex64::new(s.total_mass(), 0.0), s.skipped, None))
    })
}

/// E[Z] = ∫ Z(ξ) P(z,ξ) dV(ξ).
pub fn expectation<F>(p: &BerezinDensity, rule: &RefinedRule, z: &CPoint, f: F) -> Result<MomentResult>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    refined(rule, |r| {
        let s = sample(p, r, z, &[&f])?;
        Ok((s.mean(0), s.skipped, None))
    })
}

/// Cov[Z,W] = E[(Z−E[Z]) conj(W−E[W])], two-pass; the one-pass form is kept in `naive`.
pub fn covariance<F, G>(
    p: &BerezinDensity,
    rule: &RefinedRule,
    z: &CPoint,
    f: F,
    g: G,
) -> Result<MomentResult>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
    G: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    refined(rule, |r| {
        let s = sample(p, r, z, &[&f, &g])?;
        Ok((s.centered(0, 1), s.skipped, Some(s.naive(0, 1))))
    })
}

/// Var[Z] = Cov[Z,Z]. A real part below −1e-12 is an error.
pub fn variance<F>(p: &BerezinDensity, rule: &RefinedRule, z: &CPoint, f: F) -> Result<MomentResult>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    let m = refined(rule, |r| {
        let s = sample(p, r, z, &[&f])?;
        Ok((s.centered(0, 0), s.skipped, Some(s.naive(0, 0))))
    })?;
    check_variance(m)
}

pub(crate) fn check_variance(m: MomentResult) -> Result<MomentResult> {
    if m.value.re < -NEGATIVE_VARIANCE_TOL {
        return Err(Error::NegativeVariance(m.value.re));
    }
    Ok(m)
}

/// Means and the full two-pass covariance matrix of several integrands,
/// sampled once per rule.
#[derive(Clone, Debug)]
pub struct JointMoments {
    pub means: Vec<MomentResult>,
    /// Cov[Z_a, Z_b] at index a·k + b.
    pub cov: Vec<MomentResult>,
}

impl JointMoments {
    pub fn cov(&self, a: usize, b: usize) -> MomentResult {
        self.cov[a * self.means.len() + b]
    }
}

pub fn joint_moments(
    p: &BerezinDensity,
    rule: &RefinedRule,
    z: &CPoint,
    fns: &[Integrand<'_>],
) -> Result<JointMoments> {
    let k = fns.len();
    let coarse = sample(p, &rule.coarse, z, fns)?;
    let fine = sample(p, &rule.fine, z, fns)?;
    let moment = |c: Complex64, f: Complex64, naive: Option<Complex64>| MomentResult {
        value: f,
        quad_error_estimate: (f - c).norm(),
        skipped: fine.skipped,
        naive,
    };
    let means = (0..k)
        .map(|a| moment(coarse.mean(a), fine.mean(a), None))
        .collect();
    let mut cov = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let m = moment(coarse.centered(a, b), fine.centered(a, b), Some(fine.naive(a, b)));
            cov.push(if a == b { check_variance(m)? } else { m });
        }
    }
    Ok(JointMoments { means, cov })
}

/// Var[∂_X log P(z,·)], which equals g(X,X).
pub fn fisher_pullback(
    p: &BerezinDensity,
    rule: &RefinedRule,
    z: &CPoint,
    x: &TangentVector,
) -> Result<MomentResult> {
    p.kernel.domain().require_interior(z)?;
    check_dim(z.dim(), x.dir.len())?;
    let diag = p.diagonal_log_derivative(z)?;
    variance(p, rule, z, |xi| p.dlogp_with(&diag, &x.dir, xi))
}

/// E[∂_X log P(z,·)], which vanishes.
pub fn score_mean(
    p: &BerezinDensity,
    rule: &RefinedRule,
    z: &CPoint,
    x: &TangentVector,
) -> Result<MomentResult> {
    check_dim(z.dim(), x.dir.len())?;
    let diag = p.diagonal_log_derivative(z)?;
    expectation(p, rule, z, |xi| p.dlogp_with(&diag, &x.dir, xi))
}

/// |f(z) − ∫ f(ξ) P(z,ξ) dV(ξ)| for a holomorphic polynomial f.
pub fn reproducing_check<F>(p: &BerezinDensity, rule: &RefinedRule, z: &CPoint, f: F) -> Result<f64>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let m = expectation(p, rule, z, |xi| Ok(f(xi)))?;
    Ok((f(z) - m.value).norm())
}

/// Bisects Re K(z, ·) along the segment from `a` to `b`, which must show a sign
/// change; returns the located point, where P(z,·) vanishes when K is real on
/// the segment.
pub fn kernel_zero_on_segment(
    kernel: &KernelHandle,
    z: &[Complex64],
    a: &[Complex64],
    b: &[Complex64],
) -> Result<CPoint> {
    check_dim(z.len(), a.len())?;
    check_dim(z.len(), b.len())?;
    let at = |t: f64| -> Vec<Complex64> { a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect() };
    let f = |t: f64| -> Result<f64> { Ok(kernel.value(z, &at(t))?.re) };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(CPoint::new(at(lo)));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!(
            "Re K has no sign change between {} and {}",
            fmt_coords(a),
            fmt_coords(b)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(CPoint::new(at(mid)));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CPoint::new(at(0.5 * (lo + hi))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::kernel::{closed_form_kernel, laurent_kernel};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disc() -> (BerezinDensity, RefinedRule) {
        let d = DomainSpec::disc();
        (
            BerezinDensity::new(closed_form_kernel(&d).unwrap()),
            RefinedRule::new(&d, 30).unwrap(),
        )
    }

    #[test]
    fn density_at_center_is_uniform() {
        let (p, _) = disc();
        for xi in [c(0.1, 0.2), c(-0.7, 0.0), c(0.0, 0.9)] {
            assert!((p.density(&[c(0.0, 0.0)], &[xi]).unwrap() - 1.0 / PI).abs() < 1e-15);
        }
    }

    #[test]
    fn normalization_and_symmetry() {
        let (p, rule) = disc();
        let z = CPoint::new(vec![c(0.3, -0.2)]);
        assert!((normalization(&p, &rule, &z).unwrap().value - 1.0).norm() < 1e-10);
        let o = CPoint::origin(1);
        let m = expectation(&p, &rule, &o, |xi| Ok(xi[0])).unwrap();
        assert!(m.value.norm() < 1e-12);
        let v = variance(&p, &rule, &o, |_| Ok(c(2.0, 1.0))).unwrap();
        assert!(v.value.norm() < 1e-14);
    }

    #[test]
    fn disc_score_closed_form() {
        // ∂ log P(z,ξ) = −2(z̄/(1−|z|²) − ξ̄/(1−zξ̄))
        let (p, _) = disc();
        let z = CPoint::new(vec![c(0.3, 0.4)]);
        let x = TangentVector::new(z.clone(), vec![c(1.0, 0.0)]).unwrap();
        let xi = [c(-0.2, 0.5)];
        let got = p.dlogp(&z, &x, &xi).unwrap();
        let zc = z[0];
        let expect = -2.0 * (zc.conj() / (1.0 - zc.norm_sqr()) - xi[0].conj() / (1.0 - zc * xi[0].conj()));
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn fisher_identity_on_disc() {
        let (p, rule) = disc();
        let o = CPoint::origin(1);
        let x = TangentVector::new(o.clone(), vec![c(1.0, 0.0)]).unwrap();
        let v = fisher_pullback(&p, &rule, &o, &x).unwrap();
        assert!((v.value.re - 2.0).abs() < 1e-6);
        assert!((v.naive.unwrap() - v.value).norm() < 1e-10);
        let z = CPoint::new(vec![c(0.4, 0.0)]);
        let x = TangentVector::new(z.clone(), vec![c(1.0, 0.0)]).unwrap();
        assert!(score_mean(&p, &rule, &z, &x).unwrap().value.norm() < 1e-8);
    }

    #[test]
    fn reproducing_polynomial() {
        let (p, rule) = disc();
        let z = CPoint::real(&[0.3]);
        assert!(reproducing_check(&p, &rule, &z, |xi| xi[0] * xi[0]).unwrap() < 1e-8);
        assert!(reproducing_check(&p, &rule, &z, |_| c(1.0, 0.0)).unwrap() < 1e-12);
    }

    #[test]
    fn annulus_density_vanishes() {
        let d = DomainSpec::annulus(0.5).unwrap();
        let k = laurent_kernel(&d, 60).unwrap();
        let z = [c(0.7, 0.0)];
        let zero = kernel_zero_on_segment(&k, &z, &[c(-0.501, 0.0)], &[c(-0.95, 0.0)]).unwrap();
        assert!(zero[0].re < -0.504 && zero[0].re > -0.506);
        let p = BerezinDensity::new(k);
        let dens = p.density(&z, &zero).unwrap();
        let nearby = p.density(&z, &[c(-0.6, 0.0)]).unwrap();
        assert!(dens < 1e-12 * nearby, "{dens} vs {nearby}");
    }
}
