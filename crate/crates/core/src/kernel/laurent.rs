use std::f64::consts::PI;

use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};

use super::{Jet, Want};
use crate::error::{Error, Result};
use crate::point::fmt_coords;

/// Σ_{k=−N}^{N} (z ξ̄)^k / c_k with c_k = ∫_A |z|^{2k} dV.
#[derive(Clone, Debug)]
pub struct LaurentKernel {
    inner: f64,
    truncation: usize,
    /// 1/c_k for k = −N..=N, stored at index k + N.
    inv_c: Vec<f64>,
}

/// ∫_{r<|z|<1} |z|^{2k} dV.
pub fn annulus_moment(inner: f64, k: i64) -> f64 {
    if k == -1 {
        2.0 * PI * (1.0 / inner).ln()
    } else {
        let e = (2 * k + 2) as f64;
        -PI * (e * inner.ln()).exp_m1() / (k + 1) as f64
    }
}

impl LaurentKernel {
    pub fn new(inner: f64, truncation: usize) -> Result<Self> {
        if !(inner > 0.0 && inner < 1.0) {
            return Err(Error::InvalidDomain(format!("annulus inner radius {inner}")));
        }
        if truncation == 0 {
            return Err(Error::InvalidArgument("Laurent truncation must be at least 1".into()));
        }
        let n = truncation as i64;
        let inv_c: Vec<f64> = (-n..=n).map(|k| 1.0 / annulus_moment(inner, k)).collect();
        if inv_c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Laurent truncation {truncation} overflows for inner radius {inner}"
            )));
        }
        Ok(Self {
            inner,
            truncation,
            inv_c,
        })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn check(&self, p: &[Complex64]) -> Result<()> {
        let m = p[0].norm();
        if m > self.inner && m < 1.0 {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: fmt_coords(p),
                domain: format!("annulus({})", self.inner),
            })
        }
    }

    pub(super) fn jet(&self, z: &[Complex64], xi: &[Complex64], want: Want) -> Result<Jet> {
        self.check(z)?;
        self.check(xi)?;
        let zc = z[0];
        let xc = xi[0].conj();
        let w = zc * xc;
        let winv = w.inv();
        let n = self.truncation;
        // s0 = Σ w^k/c_k, s1 = Σ k w^k/c_k, s2 = Σ k² w^k/c_k.
        let mut s0 = Complex64::new(self.inv_c[n], 0.0);
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        let mut pos = Complex64::new(1.0, 0.0);
        let mut neg = Complex64::new(1.0, 0.0);
        for k in 1..=n {
            pos *= w;
            neg *= winv;
            let tp = pos * self.inv_c[n + k];
            let tn = neg * self.inv_c[n - k];
            let kf = k as f64;
            s0 += tp + tn;
            s1 += (tp - tn) * kf;
            s2 += (tp + tn) * (kf * kf);
        }
        let dz = if want.dz {
            smallvec![s1 / zc]
        } else {
            SmallVec::new()
        };
        let dxibar = if want.dxibar {
            smallvec![s1 / xc]
        } else {
            SmallVec::new()
        };
        let mixed = if want.mixed {
            smallvec![s2 * winv]
        } else {
            SmallVec::new()
        };
        super::closed::check_finite(z, xi, s0)?;
        Ok(Jet {
            value: s0,
            dz,
            dxibar,
            mixed,
        })
    }
}
