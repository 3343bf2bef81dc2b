use std::ops::Range;

use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};

use super::{Jet, Want};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::point::{check_dim, fmt_coords, Coords};
use crate::quadrature::{pairwise_reduce, QuadRule};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative eigenvalue cutoff used when orthonormalizing the Gram matrix.
pub const EIGEN_CUTOFF: f64 = 1e-12;

const GRAM_LEAF: usize = 256;

/// Orthonormalized monomial basis φ_i = Σ_a B_{ai} z^{α_a}.
#[derive(Clone, Debug)]
pub struct NumericBasis {
    dim: usize,
    degree: usize,
    exponents: Vec<SmallVec<[i32; 4]>>,
    /// Smallest exponent per coordinate (negative for annulus coordinates).
    low: Vec<i32>,
    /// p×k coefficient matrix, row-major.
    coeffs: Vec<Complex64>,
    kept: usize,
    gram_min_eig: f64,
    gram_max_eig: f64,
}

/// Exponent multi-indices α with Σ|α_j| ≤ degree; coordinates flagged in
/// `laurent` may carry negative exponents.
pub fn exponent_set(laurent: &[bool], degree: usize) -> Vec<SmallVec<[i32; 4]>> {
    fn rec(
        j: usize,
        budget: i32,
        laurent: &[bool],
        cur: &mut SmallVec<[i32; 4]>,
        out: &mut Vec<SmallVec<[i32; 4]>>,
    ) {
        if j == laurent.len() {
            out.push(cur.clone());
            return;
        }
        let lo = if laurent[j] { -budget } else { 0 };
        for e in lo..=budget {
            cur.push(e);
            rec(j + 1, budget - e.abs(), laurent, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, degree as i32, laurent, &mut SmallVec::new(), &mut out);
    out.sort_by_key(|a| (a.iter().map(|e| e.abs()).sum::<i32>(), a.clone()));
    out
}

fn laurent_flags(domain: &DomainSpec) -> Vec<bool> {
    let mut flags = vec![false; domain.dim()];
    for (off, b) in domain.blocks() {
        if let DomainSpec::Annulus { .. } = b {
            flags[off] = true;
        }
    }
    flags
}

impl NumericBasis {
    pub fn build(domain: &DomainSpec, rule: &QuadRule, degree: usize) -> Result<Self> {
        let n = domain.dim();
        check_dim(n, rule.dim())?;
        if rule.domain().to_string() != domain.to_string() {
            return Err(Error::InvalidArgument(format!(
                "rule built on {} used for {}",
                rule.domain(),
                domain
            )));
        }
        if let Some(exact) = rule.exact_degree() {
            if 2 * degree > exact {
                return Err(Error::RuleTooCoarse { degree, exact });
            }
        }
        let flags = laurent_flags(domain);
        let exponents = exponent_set(&flags, degree);
        let low: Vec<i32> = flags
            .iter()
            .map(|&l| if l { -(degree as i32) } else { 0 })
            .collect();
        let mut basis = Self {
            dim: n,
            degree,
            exponents,
            low,
            coeffs: Vec::new(),
            kept: 0,
            gram_min_eig: 0.0,
            gram_max_eig: 0.0,
        };
        let p = basis.exponents.len();

        // G_ab = Σ_i w_i v_a(x_i) conj(v_b(x_i)), assembled over node blocks.
        let gram = pairwise_reduce(
            rule.len(),
            GRAM_LEAF,
            &|r: Range<usize>| -> Result<CMatrix> {
                let mut a = CMatrix::zeros(r.len(), p);
                let mut v = vec![ZERO; p];
                for (row, i) in r.clone().enumerate() {
                    let node = rule.node(i);
                    basis.monomials(node, &mut v);
                    let sw = rule.weight(i).sqrt();
                    for (col, val) in v.iter().enumerate() {
                        if !(val.re.is_finite() && val.im.is_finite()) {
                            return Err(Error::NonFinite {
                                index: i,
                                point: fmt_coords(node),
                                value: val.to_string(),
                            });
                        }
                        a[(row, col)] = val * sw;
                    }
                }
                Ok(a.transpose() * a.conjugate())
            },
            &|x: Result<CMatrix>, y: Result<CMatrix>| Ok(x? + y?),
        )?;

        // Diagonal equilibration keeps monomials of very different norms comparable.
        let scale: Vec<f64> = (0..p)
            .map(|a| {
                let d = gram[(a, a)].re;
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let scaled = CMatrix::from_fn(p, p, |a, b| gram[(a, b)] * (scale[a] * scale[b]));
        let (values, u) = hermitian_eigen(&scaled);
        let lmax = values.last().copied().unwrap_or(0.0);
        if !(lmax > 0.0) {
            return Err(Error::Inconsistent(
                "Gram matrix of the monomial basis is not positive".into(),
            ));
        }
        let keep: Vec<usize> = (0..p).filter(|&i| values[i] > EIGEN_CUTOFF * lmax).collect();
        let k = keep.len();
        let mut coeffs = vec![ZERO; p * k];
        for a in 0..p {
            for (c, &i) in keep.iter().enumerate() {
                coeffs[a * k + c] = u[(a, i)].conj() * (scale[a] / values[i].sqrt());
            }
        }
        if k < p {
            debug!(
                "numeric kernel on {domain}: kept {k} of {p} directions (degree {degree})"
            );
        }
        basis.coeffs = coeffs;
        basis.kept = k;
        basis.gram_min_eig = values[0];
        basis.gram_max_eig = lmax;
        Ok(basis)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of monomials before the eigenvalue cutoff.
    pub fn monomial_count(&self) -> usize {
        self.exponents.len()
    }

    /// Number of orthonormal functions kept after the cutoff.
    pub fn effective_size(&self) -> usize {
        self.kept
    }

    /// Extreme eigenvalues of the equilibrated Gram matrix.
    pub fn gram_spectrum(&self) -> (f64, f64) {
        (self.gram_min_eig, self.gram_max_eig)
    }

    /// Coefficient matrix (monomials × orthonormal functions).
    pub fn coefficients(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.exponents.len(), self.kept, &self.coeffs)
    }

    fn power_table(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let d = self.degree as i32;
        (0..self.dim)
            .map(|j| {
                let lo = self.table_low(j);
                let mut row = vec![ZERO; (d - lo + 1) as usize];
                let zero = (-lo) as usize;
                row[zero] = Complex64::new(1.0, 0.0);
                for e in 1..=d as usize {
                    row[zero + e] = row[zero + e - 1] * z[j];
                }
                if lo < 0 {
                    let inv = z[j].inv();
                    for e in 1..=(-lo) as usize {
                        row[zero - e] = row[zero - e + 1] * inv;
                    }
                }
                row
            })
            .collect()
    }

    /// Lowest tabulated power; one below the lowest exponent so that
    /// derivatives of z^{−d} are available.
    fn table_low(&self, j: usize) -> i32 {
        if self.low[j] < 0 {
            self.low[j] - 1
        } else {
            0
        }
    }

    fn pow(&self, table: &[Vec<Complex64>], j: usize, e: i32) -> Complex64 {
        table[j][(e - self.table_low(j)) as usize]
    }

    fn monomials(&self, z: &[Complex64], out: &mut [Complex64]) {
        let t = self.power_table(z);
        for (a, alpha) in self.exponents.iter().enumerate() {
            let mut v = Complex64::new(1.0, 0.0);
            for (j, &e) in alpha.iter().enumerate() {
                v *= self.pow(&t, j, e);
            }
            out[a] = v;
        }
    }

    /// φ(z) and, if requested, ∂φ/∂z_j for each j (j-major).
    fn phi(&self, z: &[Complex64], derivs: bool) -> (Vec<Complex64>, Vec<Complex64>) {
        let k = self.kept;
        let t = self.power_table(z);
        let mut phi = vec![ZERO; k];
        let mut dphi = if derivs {
            vec![ZERO; k * self.dim]
        } else {
            Vec::new()
        };
        let mut factors: SmallVec<[Complex64; 4]> = smallvec![ZERO; self.dim];
        for (a, alpha) in self.exponents.iter().enumerate() {
            let mut v = Complex64::new(1.0, 0.0);
            for (j, &e) in alpha.iter().enumerate() {
                factors[j] = self.pow(&t, j, e);
                v *= factors[j];
            }
            let row = &self.coeffs[a * k..(a + 1) * k];
            for (p, c) in phi.iter_mut().zip(row) {
                *p += c * v;
            }
            if derivs {
                for j in 0..self.dim {
                    let e = alpha[j];
                    if e == 0 {
                        continue;
                    }
                    let mut dv = self.pow(&t, j, e - 1) * e as f64;
                    for (l, f) in factors.iter().enumerate() {
                        if l != j {
                            dv *= f;
                        }
                    }
                    let out = &mut dphi[j * k..(j + 1) * k];
                    for (p, c) in out.iter_mut().zip(row) {
                        *p += c * dv;
                    }
                }
            }
        }
        (phi, dphi)
    }

    pub(super) fn jet(&self, z: &[Complex64], xi: &[Complex64], want: Want) -> Result<Jet> {
        let n = self.dim;
        let k = self.kept;
        let (pz, dpz) = self.phi(z, want.dz || want.mixed);
        let (px, dpx) = self.phi(xi, want.dxibar || want.mixed);
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
        };
        let value = dot(&pz, &px);
        let mut dz: Coords = SmallVec::new();
        let mut dxibar: Coords = SmallVec::new();
        let mut mixed = SmallVec::new();
        if want.dz {
            dz = (0..n).map(|j| dot(&dpz[j * k..(j + 1) * k], &px)).collect();
        }
        if want.dxibar {
            dxibar = (0..n).map(|j| dot(&pz, &dpx[j * k..(j + 1) * k])).collect();
        }
        if want.mixed {
            for j in 0..n {
                for l in 0..n {
                    mixed.push(dot(&dpz[j * k..(j + 1) * k], &dpx[l * k..(l + 1) * k]));
                }
            }
        }
        super::closed::check_finite(z, xi, value)?;
        Ok(Jet {
            value,
            dz,
            dxibar,
            mixed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{closed_form_kernel, laurent_kernel, numeric_kernel};
    use super::*;
    use crate::quadrature::build_rule;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponent_counts() {
        assert_eq!(exponent_set(&[false], 5).len(), 6);
        assert_eq!(exponent_set(&[false, false], 3).len(), 10);
        assert_eq!(exponent_set(&[true], 3).len(), 7);
        assert_eq!(exponent_set(&[false, false], 2)[0].as_slice(), &[0, 0]);
    }

    #[test]
    fn degree_zero_is_constant() {
        let d = DomainSpec::disc();
        let rule = build_rule(&d, 4).unwrap();
        let k = numeric_kernel(&d, &rule, 0).unwrap();
        let v = k.value(&[c(0.3, 0.1)], &[c(-0.5, 0.2)]).unwrap();
        assert!((v - c(1.0 / PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn disc_matches_closed_form() {
        let d = DomainSpec::disc();
        let rule = build_rule(&d, 34).unwrap();
        let k = numeric_kernel(&d, &rule, 30).unwrap();
        let exact = closed_form_kernel(&d).unwrap();
        let (z, xi) = ([c(0.3, 0.0)], [c(0.2, 0.0)]);
        let a = k.value(&z, &xi).unwrap();
        let b = exact.value(&z, &xi).unwrap();
        assert!((a - b).norm() / b.norm() < 1e-8);
        assert_eq!(k.effective_basis_size(), Some(31));
    }

    #[test]
    fn bidisc_origin() {
        let d = DomainSpec::polydisc(2).unwrap();
        let rule = build_rule(&d, 14).unwrap();
        let k = numeric_kernel(&d, &rule, 10).unwrap();
        let o = [c(0.0, 0.0); 2];
        assert!((k.value(&o, &o).unwrap().re - 1.0 / (PI * PI)).abs() < 1e-10);
    }

    #[test]
    fn coarse_rule_is_rejected() {
        let d = DomainSpec::disc();
        let rule = build_rule(&d, 5).unwrap();
        assert!(matches!(
            numeric_kernel(&d, &rule, 30),
            Err(Error::RuleTooCoarse { .. })
        ));
    }

    #[test]
    fn annulus_matches_laurent_series() {
        let d = DomainSpec::annulus(0.5).unwrap();
        let rule = build_rule(&d, super::super::default_gram_order(&d, 20)).unwrap();
        let k = numeric_kernel(&d, &rule, 20).unwrap();
        let l = laurent_kernel(&d, 20).unwrap();
        let (z, xi) = ([c(0.6, 0.2)], [c(-0.3, 0.7)]);
        let a = k.jet(&z, &xi).unwrap();
        let b = l.jet(&z, &xi).unwrap();
        assert!((a.value - b.value).norm() < 1e-9 * b.value.norm());
        assert!((a.mixed[0] - b.mixed[0]).norm() < 1e-8 * b.mixed[0].norm());
    }
}
