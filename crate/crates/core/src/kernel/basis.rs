use num_complex::Complex64;

use super::KernelHandle;
use crate::error::{Error, Result};
use crate::point::{check_dim, CPoint, TangentVector};
use crate::quadrature::{integrate_with, QuadRule};

/// The orthonormal pair (s₀, s₁) adapted to a point z₀ and direction X:
/// s₀ = K(·,z₀)/√K(z₀,z₀), s₁ the normalized part of Σ X̄_k ∂_{ξ̄_k}K(·,ξ)|_{z₀}
/// orthogonal to s₀. Then s₁(z₀) = 0, |s₀(z₀)|² = K(z₀,z₀) and
/// |∂_X s₁(z₀)|²/|s₀(z₀)|² = g(X,X).
#[derive(Clone, Debug)]
pub struct BasisPair {
    kernel: KernelHandle,
    base: CPoint,
    dir: TangentVector,
    k00: f64,
    /// conj(D)/K(z₀,z₀), the projection coefficient onto K(·,z₀).
    proj: Complex64,
    t_norm: f64,
    gram: [[Complex64; 2]; 2],
}

impl BasisPair {
    pub fn base(&self) -> &CPoint {
        &self.base
    }

    pub fn direction(&self) -> &TangentVector {
        &self.dir
    }

    pub fn s0(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(self.kernel.value(z, &self.base)? / self.k00.sqrt())
    }

    pub fn s1(&self, z: &[Complex64]) -> Result<Complex64> {
        let (k, dxb) = self.kernel.grad_xibar(z, &self.base)?;
        let k1: Complex64 = dxb.iter().zip(&self.dir.dir).map(|(d, x)| d * x.conj()).sum();
        Ok((k1 - self.proj * k) / self.t_norm)
    }

    /// ∂_Y s₁ at z.
    pub fn ds1(&self, z: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
        check_dim(self.base.dim(), y.len())?;
        let jet = self.kernel.jet(z, &self.base)?;
        let n = y.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..n {
                row += jet.mixed_at(j, k) * self.dir.dir[k].conj();
            }
            acc += y[j] * (row - self.proj * jet.dz[j]);
        }
        Ok(acc / self.t_norm)
    }

    /// K(z₀, z₀) = |s₀(z₀)|².
    pub fn kernel_diagonal(&self) -> f64 {
        self.k00
    }

    /// |∂_X s₁(z₀)|²/|s₀(z₀)|², which equals g(X,X).
    pub fn metric_ratio(&self) -> f64 {
        self.t_norm * self.t_norm / self.k00
    }

    /// Quadrature Gram matrix [[⟨s₀,s₀⟩, ⟨s₀,s₁⟩], [⟨s₁,s₀⟩, ⟨s₁,s₁⟩]].
    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        self.gram
    }

    /// Max entry deviation of the quadrature Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram;
        [
            (g[0][0] - 1.0).norm(),
            (g[1][1] - 1.0).norm(),
            g[0][1].norm(),
            g[1][0].norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Builds the special basis pair at `z0` in direction `x`, measuring its
/// orthonormality with `rule`.
pub fn special_basis(
    kernel: &KernelHandle,
    rule: &QuadRule,
    z0: &CPoint,
    x: &TangentVector,
) -> Result<BasisPair> {
    kernel.domain().require_interior(z0)?;
    check_dim(kernel.dim(), x.dir.len())?;
    if x.is_zero() {
        return Err(Error::InvalidArgument("special basis needs a nonzero direction".into()));
    }
    let jet = kernel.jet(z0, z0)?;
    let k00 = kernel.diagonal(z0)?;
    let n = kernel.dim();
    let mut d = Complex64::new(0.0, 0.0);
    let mut m = Complex64::new(0.0, 0.0);
    for j in 0..n {
        d += x.dir[j] * jet.dz[j];
        for k in 0..n {
            m += x.dir[j] * x.dir[k].conj() * jet.mixed_at(j, k);
        }
    }
    let t2 = m.re - d.norm_sqr() / k00;
    if !(t2 > 1e-14 * m.re.abs()) {
        return Err(Error::Inconsistent(format!(
            "derivative direction lies in the span of K(·,z₀) at {z0} (residual {t2:e})"
        )));
    }
    let mut pair = BasisPair {
        kernel: kernel.clone(),
        base: z0.clone(),
        dir: x.clone(),
        k00,
        proj: d.conj() / k00,
        t_norm: t2.sqrt(),
        gram: [[Complex64::new(0.0, 0.0); 2]; 2],
    };
    let g00 = integrate_with(rule, |p| Ok(pair.s0(p)?.norm_sqr().into()))?;
    let g11 = integrate_with(rule, |p| Ok(pair.s1(p)?.norm_sqr().into()))?;
    let g01 = integrate_with(rule, |p| Ok(pair.s0(p)? * pair.s1(p)?.conj()))?;
    pair.gram = [[g00, g01], [g01.conj(), g11]];
    Ok(pair)
}

/// True iff |K(z₁,z₂)|² differs from K(z₁,z₁)K(z₂,z₂) by more than a relative 1e-10,
/// i.e. the kernel functions at z₁ and z₂ are not parallel.
pub fn separates_points(kernel: &KernelHandle, z1: &[Complex64], z2: &[Complex64]) -> Result<bool> {
    let k11 = kernel.diagonal(z1)?;
    let k22 = kernel.diagonal(z2)?;
    let k12 = kernel.value(z1, z2)?.norm_sqr();
    let prod = k11 * k22;
    Ok((prod - k12).abs() > 1e-10 * prod)
}

#[cfg(test)]
mod tests {
    use super::super::closed_form_kernel;
    use super::*;
    use crate::domain::DomainSpec;
    use crate::quadrature::build_rule;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_origin() {
        let d = DomainSpec::disc();
        let k = closed_form_kernel(&d).unwrap();
        let rule = build_rule(&d, 20).unwrap();
        let z0 = CPoint::origin(1);
        let x = TangentVector::new(z0.clone(), vec![c(1.0, 0.0)]).unwrap();
        let pair = special_basis(&k, &rule, &z0, &x).unwrap();
        assert!((pair.s0(&z0).unwrap().norm_sqr() - 1.0 / PI).abs() < 1e-15);
        assert!((pair.metric_ratio() - 2.0).abs() < 1e-12);
        assert!(pair.s1(&z0).unwrap().norm() < 1e-15);
        assert!(pair.orthonormality_defect() < 1e-10);
        let ds1 = pair.ds1(&z0, &x.dir).unwrap();
        assert!((ds1.norm_sqr() / pair.s0(&z0).unwrap().norm_sqr() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ball_ratio_off_origin() {
        let d = DomainSpec::ball(2).unwrap();
        let k = closed_form_kernel(&d).unwrap();
        let rule = build_rule(&d, 12).unwrap();
        let z0 = CPoint::origin(2);
        let x = TangentVector::new(z0.clone(), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let pair = special_basis(&k, &rule, &z0, &x).unwrap();
        assert!((pair.metric_ratio() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_direction_rejected() {
        let d = DomainSpec::disc();
        let k = closed_form_kernel(&d).unwrap();
        let rule = build_rule(&d, 4).unwrap();
        let z0 = CPoint::origin(1);
        let x = TangentVector::new(z0.clone(), vec![c(0.0, 0.0)]).unwrap();
        assert!(special_basis(&k, &rule, &z0, &x).is_err());
    }

    #[test]
    fn separation() {
        let disc = closed_form_kernel(&DomainSpec::disc()).unwrap();
        assert!(separates_points(&disc, &[c(0.0, 0.0)], &[c(0.5, 0.0)]).unwrap());
        assert!(!separates_points(&disc, &[c(0.3, 0.2)], &[c(0.3, 0.2)]).unwrap());
        let bidisc = closed_form_kernel(&DomainSpec::polydisc(2).unwrap()).unwrap();
        assert!(separates_points(&bidisc, &[c(0.0, 0.0); 2], &[c(0.3, 0.0), c(0.4, 0.0)]).unwrap());
    }
}
