//! Bergman kernels K(z, ξ), holomorphic in z and antiholomorphic in ξ, with
//! exact first derivatives ∂_{z_j}K, ∂_{ξ̄_k}K and ∂_{z_j}∂_{ξ̄_k}K.
//!
//! Backends:
//! * closed forms for balls, with products (polydiscs) assembled factorwise;
//! * the truncated Laurent series of an annulus;
//! * a numeric kernel Σ φ_j(z) conj(φ_j(ξ)) over an orthonormalized monomial
//!   (or Laurent-monomial) basis. Density of that basis in A²(Ω) is a
//!   hypothesis for general domains, not something the numeric backend checks.
//!
//! Derivatives never use finite differences; those appear only in tests.

mod basis;
mod closed;
mod laurent;
mod numeric;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::point::{check_dim, fmt_coords, Coords};
use crate::quadrature::QuadRule;

pub use basis::{separates_points, special_basis, BasisPair};
pub use laurent::LaurentKernel;
pub use numeric::NumericBasis;

/// Kernel value with the requested first derivatives at (z, ξ).
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: Complex64,
    /// ∂K/∂z_j.
    pub dz: Coords,
    /// ∂K/∂ξ̄_k.
    pub dxibar: Coords,
    /// ∂²K/∂z_j∂ξ̄_k, row-major n×n.
    pub mixed: SmallVec<[Complex64; 16]>,
}

impl Jet {
    pub fn mixed_at(&self, j: usize, k: usize) -> Complex64 {
        let n = self.dz.len().max(self.dxibar.len());
        self.mixed[j * n + k]
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Want {
    pub dz: bool,
    pub dxibar: bool,
    pub mixed: bool,
}

impl Want {
    pub const VALUE: Want = Want {
        dz: false,
        dxibar: false,
        mixed: false,
    };
    pub const DZ: Want = Want {
        dz: true,
        dxibar: false,
        mixed: false,
    };
    pub const DXIBAR: Want = Want {
        dz: false,
        dxibar: true,
        mixed: false,
    };
    pub const FULL: Want = Want {
        dz: true,
        dxibar: true,
        mixed: true,
    };
}

/// Evaluator backend behind a [`KernelHandle`].
#[derive(Clone, Debug)]
pub enum Backend {
    /// n!/πⁿ · (1 − ⟨z,ξ⟩)^{−(n+1)} on the unit ball of ℂⁿ.
    ClosedFormBall { dim: usize },
    /// Product of factor kernels acting on consecutive coordinate blocks.
    Product(Vec<KernelHandle>),
    LaurentAnnulus(LaurentKernel),
    Numeric(Arc<NumericBasis>),
}

/// A Bergman kernel evaluator for one domain. Immutable and cheap to clone.
#[derive(Clone, Debug)]
pub struct KernelHandle {
    domain: DomainSpec,
    backend: Backend,
}

impl KernelHandle {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Short backend label used in reports.
    pub fn backend_name(&self) -> &'static str {
        match &self.backend {
            Backend::ClosedFormBall { .. } => "closed",
            Backend::Product(fs) => {
                if fs.iter().all(KernelHandle::is_closed_form) {
                    "closed"
                } else {
                    "product"
                }
            }
            Backend::LaurentAnnulus(_) => "laurent",
            Backend::Numeric(_) => "numeric",
        }
    }

    /// True for closed-form ball kernels and products of them.
    pub fn is_closed_form(&self) -> bool {
        match &self.backend {
            Backend::ClosedFormBall { .. } => true,
            Backend::Product(fs) => fs.iter().all(KernelHandle::is_closed_form),
            _ => false,
        }
    }

    /// Number of orthonormal functions kept by a numeric backend.
    pub fn effective_basis_size(&self) -> Option<usize> {
        match &self.backend {
            Backend::Numeric(b) => Some(b.effective_size()),
            Backend::Product(fs) => fs
                .iter()
                .filter_map(KernelHandle::effective_basis_size)
                .reduce(|a, b| a * b),
            _ => None,
        }
    }

    pub fn value(&self, z: &[Complex64], xi: &[Complex64]) -> Result<Complex64> {
        Ok(self.jet_with(z, xi, Want::VALUE)?.value)
    }

    /// K(z, ξ) and ∂K/∂z_j.
    pub fn grad_z(&self, z: &[Complex64], xi: &[Complex64]) -> Result<(Complex64, Coords)> {
        let j = self.jet_with(z, xi, Want::DZ)?;
        Ok((j.value, j.dz))
    }

    /// K(z, ξ) and ∂K/∂ξ̄_k.
    pub fn grad_xibar(&self, z: &[Complex64], xi: &[Complex64]) -> Result<(Complex64, Coords)> {
        let j = self.jet_with(z, xi, Want::DXIBAR)?;
        Ok((j.value, j.dxibar))
    }

    /// Value and all first derivatives, including the mixed ones.
    pub fn jet(&self, z: &[Complex64], xi: &[Complex64]) -> Result<Jet> {
        self.jet_with(z, xi, Want::FULL)
    }

    /// K(z, z), required to be positive.
    pub fn diagonal(&self, z: &[Complex64]) -> Result<f64> {
        let v = self.value(z, z)?.re;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::KernelNotPositive {
                point: fmt_coords(z),
                value: v,
            })
        }
    }

    pub(crate) fn jet_with(&self, z: &[Complex64], xi: &[Complex64], want: Want) -> Result<Jet> {
        let n = self.dim();
        check_dim(n, z.len())?;
        check_dim(n, xi.len())?;
        match &self.backend {
            Backend::ClosedFormBall { dim } => closed::ball_jet(*dim, z, xi, want),
            Backend::Product(fs) => closed::product_jet(fs, z, xi, want),
            Backend::LaurentAnnulus(l) => l.jet(z, xi, want),
            Backend::Numeric(b) => b.jet(z, xi, want),
        }
    }
}

/// Exact kernel of a ball, polydisc, or product of those.
pub fn closed_form_kernel(domain: &DomainSpec) -> Result<KernelHandle> {
    let backend = match domain {
        DomainSpec::Ball { dim } => Backend::ClosedFormBall { dim: *dim },
        DomainSpec::Polydisc { dim } => {
            let disc = closed_form_kernel(&DomainSpec::disc())?;
            Backend::Product(vec![disc; *dim])
        }
        DomainSpec::Product(fs) => Backend::Product(
            fs.iter()
                .map(closed_form_kernel)
                .collect::<Result<Vec<_>>>()?,
        ),
        other => {
            return Err(Error::Unsupported {
                op: "closed_form_kernel",
                domain: other.to_string(),
            })
        }
    };
    Ok(KernelHandle {
        domain: domain.clone(),
        backend,
    })
}

/// Truncated Laurent-series kernel Σ_{|k|≤N} z^k ξ̄^k / c_k of an annulus.
pub fn laurent_kernel(domain: &DomainSpec, truncation: usize) -> Result<KernelHandle> {
    match domain {
        DomainSpec::Annulus { inner } => Ok(KernelHandle {
            domain: domain.clone(),
            backend: Backend::LaurentAnnulus(LaurentKernel::new(*inner, truncation)?),
        }),
        other => Err(Error::Unsupported {
            op: "laurent_kernel",
            domain: other.to_string(),
        }),
    }
}

/// Kernel of the span of monomials of total degree ≤ `degree`, orthonormalized
/// against `rule`. Annulus coordinates use Laurent monomials z^k, |k| ≤ degree.
pub fn numeric_kernel(domain: &DomainSpec, rule: &QuadRule, degree: usize) -> Result<KernelHandle> {
    let basis = NumericBasis::build(domain, rule, degree)?;
    Ok(KernelHandle {
        domain: domain.clone(),
        backend: Backend::Numeric(Arc::new(basis)),
    })
}

/// Kernel backend selection as it appears in scenario files:
/// `{"kernel":"closed"|"laurent"|"numeric", "degree":d, "truncation":N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kernel: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Quadrature order for the numeric Gram matrix; defaults to a value
    /// sufficient for `degree`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Closed,
    Laurent,
    Numeric,
}

impl KernelConfig {
    pub fn closed() -> Self {
        Self {
            kernel: KernelKind::Closed,
            degree: None,
            truncation: None,
            order: None,
        }
    }

    pub const DEFAULT_DEGREE: usize = 20;
    pub const DEFAULT_TRUNCATION: usize = 60;

    /// Builds the configured kernel on `domain`.
    pub fn build(&self, domain: &DomainSpec) -> Result<KernelHandle> {
        match self.kernel {
            KernelKind::Closed => closed_form_kernel(domain),
            KernelKind::Laurent => {
                laurent_kernel(domain, self.truncation.unwrap_or(Self::DEFAULT_TRUNCATION))
            }
            KernelKind::Numeric => {
                let degree = self.degree.unwrap_or(Self::DEFAULT_DEGREE);
                let order = self.order.unwrap_or_else(|| default_gram_order(domain, degree));
                let rule = crate::quadrature::build_rule(domain, order)?;
                numeric_kernel(domain, &rule, degree)
            }
        }
    }
}

/// Smallest convenient quadrature order whose exactness covers a degree-`degree` Gram matrix.
pub fn default_gram_order(domain: &DomainSpec, degree: usize) -> usize {
    let has_annulus = domain
        .blocks()
        .iter()
        .any(|(_, b)| matches!(b, DomainSpec::Annulus { .. }));
    if has_annulus {
        let width = domain
            .blocks()
            .iter()
            .filter_map(|(_, b)| match b {
                DomainSpec::Annulus { inner } => Some(-inner.ln()),
                _ => None,
            })
            .fold(0.0, f64::max);
        let radial = ((2.0 * degree as f64 + 2.0) * width).ceil() as usize;
        radial.max(degree + 1) + 4
    } else {
        degree + 4
    }
}
