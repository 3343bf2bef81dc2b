use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};

use super::{Jet, KernelHandle, Want};
use crate::error::{Error, Result};
use crate::point::{fmt_coords, Coords};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn ball_constant(n: usize) -> f64 {
    let mut c = 1.0;
    for k in 1..=n {
        c *= k as f64 / std::f64::consts::PI;
    }
    c
}

/// K = c·q^{−(n+1)}, q = 1 − Σ z_j ξ̄_j.
pub(super) fn ball_jet(n: usize, z: &[Complex64], xi: &[Complex64], want: Want) -> Result<Jet> {
    let mut q = Complex64::new(1.0, 0.0);
    for (a, b) in z.iter().zip(xi) {
        q -= a * b.conj();
    }
    if q.norm() < 1e-300 {
        return Err(Error::KernelSingular {
            z: fmt_coords(z),
            xi: fmt_coords(xi),
        });
    }
    let c = ball_constant(n);
    let p = (n + 1) as i32;
    let inv = q.inv();
    let value = c * inv.powi(p);
    let d1 = value * inv * (n + 1) as f64; // c(n+1) q^{−(n+2)}
    let dz: Coords = if want.dz {
        xi.iter().map(|x| d1 * x.conj()).collect()
    } else {
        SmallVec::new()
    };
    let dxibar: Coords = if want.dxibar {
        z.iter().map(|w| d1 * w).collect()
    } else {
        SmallVec::new()
    };
    let mut mixed = SmallVec::new();
    if want.mixed {
        let d2 = d1 * inv * (n + 2) as f64; // c(n+1)(n+2) q^{−(n+3)}
        mixed.reserve(n * n);
        for j in 0..n {
            for k in 0..n {
                let mut m = d2 * xi[j].conj() * z[k];
                if j == k {
                    m += d1;
                }
                mixed.push(m);
            }
        }
    }
    check_finite(z, xi, value)?;
    Ok(Jet {
        value,
        dz,
        dxibar,
        mixed,
    })
}

/// K = Π K_f over coordinate blocks; derivatives by the product rule using the
/// complementary products, so vanishing factors never cause a division by zero.
pub(super) fn product_jet(
    factors: &[KernelHandle],
    z: &[Complex64],
    xi: &[Complex64],
    want: Want,
) -> Result<Jet> {
    let n = z.len();
    let mut jets = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for f in factors {
        let d = f.dim();
        jets.push((offset, f.jet_with(&z[offset..offset + d], &xi[offset..offset + d], want)?));
        offset += d;
    }
    let m = jets.len();
    // prefix/suffix products give Π_{b≠a} K_b without division.
    let mut prefix = vec![Complex64::new(1.0, 0.0); m + 1];
    for a in 0..m {
        prefix[a + 1] = prefix[a] * jets[a].1.value;
    }
    let mut suffix = vec![Complex64::new(1.0, 0.0); m + 1];
    for a in (0..m).rev() {
        suffix[a] = suffix[a + 1] * jets[a].1.value;
    }
    let others = |a: usize| prefix[a] * suffix[a + 1];
    let others2 = |a: usize, b: usize| {
        let mut p = Complex64::new(1.0, 0.0);
        for (c, (_, j)) in jets.iter().enumerate() {
            if c != a && c != b {
                p *= j.value;
            }
        }
        p
    };
    let value = prefix[m];

    let mut dz: Coords = SmallVec::new();
    let mut dxibar: Coords = SmallVec::new();
    if want.dz {
        dz = smallvec![ZERO; n];
        for (a, (off, j)) in jets.iter().enumerate() {
            let o = others(a);
            for (k, v) in j.dz.iter().enumerate() {
                dz[off + k] = v * o;
            }
        }
    }
    if want.dxibar {
        dxibar = smallvec![ZERO; n];
        for (a, (off, j)) in jets.iter().enumerate() {
            let o = others(a);
            for (k, v) in j.dxibar.iter().enumerate() {
                dxibar[off + k] = v * o;
            }
        }
    }
    let mut mixed = SmallVec::new();
    if want.mixed {
        mixed = smallvec![ZERO; n * n];
        for (a, (oa, ja)) in jets.iter().enumerate() {
            let da = ja.dz.len();
            for (b, (ob, jb)) in jets.iter().enumerate() {
                let db = jb.dxibar.len();
                if a == b {
                    let o = others(a);
                    for r in 0..da {
                        for c in 0..da {
                            mixed[(oa + r) * n + oa + c] = ja.mixed[r * da + c] * o;
                        }
                    }
                } else {
                    let o = others2(a, b);
                    for r in 0..da {
                        for c in 0..db {
                            mixed[(oa + r) * n + ob + c] = ja.dz[r] * jb.dxibar[c] * o;
                        }
                    }
                }
            }
        }
    }
    Ok(Jet {
        value,
        dz,
        dxibar,
        mixed,
    })
}

pub(super) fn check_finite(z: &[Complex64], xi: &[Complex64], value: Complex64) -> Result<()> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(())
    } else {
        Err(Error::KernelSingular {
            z: fmt_coords(z),
            xi: fmt_coords(xi),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::closed_form_kernel;
    use crate::domain::DomainSpec;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_values() {
        let o1 = [c(0.0, 0.0)];
        let o2 = [c(0.0, 0.0); 2];
        let disc = closed_form_kernel(&DomainSpec::disc()).unwrap();
        let ball2 = closed_form_kernel(&DomainSpec::ball(2).unwrap()).unwrap();
        let bidisc = closed_form_kernel(&DomainSpec::polydisc(2).unwrap()).unwrap();
        assert!((disc.value(&o1, &o1).unwrap().re - 1.0 / PI).abs() < 1e-15);
        assert!((ball2.value(&o2, &o2).unwrap().re - 2.0 / (PI * PI)).abs() < 1e-15);
        assert!((bidisc.value(&o2, &o2).unwrap().re - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = closed_form_kernel(&DomainSpec::ball(2).unwrap()).unwrap();
        let z = [c(0.2, -0.1), c(0.3, 0.25)];
        let xi = [c(-0.1, 0.4), c(0.05, 0.2)];
        let jet = k.jet(&z, &xi).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            // K is holomorphic in z: ∂_z = d/dx along the real axis.
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let fd = (k.value(&zp, &xi).unwrap() - k.value(&zm, &xi).unwrap()) / (2.0 * h);
            assert!((fd - jet.dz[j]).norm() < 1e-7 * jet.dz[j].norm().max(1.0));
            // antiholomorphic in ξ: ∂_{ξ̄} = d/dx along the real axis of ξ.
            let mut xp = xi;
            let mut xm = xi;
            xp[j] += h;
            xm[j] -= h;
            let fd = (k.value(&z, &xp).unwrap() - k.value(&z, &xm).unwrap()) / (2.0 * h);
            assert!((fd - jet.dxibar[j]).norm() < 1e-7 * jet.dxibar[j].norm().max(1.0));
            for m in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[j] += h;
                zm[j] -= h;
                let fd = (k.grad_xibar(&zp, &xi).unwrap().1[m] - k.grad_xibar(&zm, &xi).unwrap().1[m])
                    / (2.0 * h);
                assert!((fd - jet.mixed_at(j, m)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn product_mixed_matches_factor_structure() {
        let k = closed_form_kernel(&DomainSpec::polydisc(2).unwrap()).unwrap();
        let disc = closed_form_kernel(&DomainSpec::disc()).unwrap();
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let xi = [c(0.1, -0.5), c(0.6, 0.0)];
        let jet = k.jet(&z, &xi).unwrap();
        let a = disc.jet(&z[..1], &xi[..1]).unwrap();
        let b = disc.jet(&z[1..], &xi[1..]).unwrap();
        assert!((jet.value - a.value * b.value).norm() < 1e-15);
        assert!((jet.mixed_at(0, 1) - a.dz[0] * b.dxibar[0]).norm() < 1e-14);
        assert!((jet.mixed_at(1, 1) - a.value * b.mixed[0]).norm() < 1e-14);
    }

    #[test]
    fn boundary_argument_is_finite_off_diagonal() {
        let k = closed_form_kernel(&DomainSpec::disc()).unwrap();
        assert!(k.value(&[c(0.5, 0.0)], &[c(1.0, 0.0)]).unwrap().re.is_finite());
        assert!(k.value(&[c(1.0, 0.0)], &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn annulus_is_not_closed_form() {
        assert!(closed_form_kernel(&DomainSpec::annulus(0.5).unwrap()).is_err());
    }
}
