//! Points and holomorphic tangent vectors in ℂⁿ.

use std::fmt;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline storage for coordinates; domains in this crate rarely exceed four dimensions.
pub type Coords = SmallVec<[Complex64; 4]>;

/// A point of ℂⁿ. Serialized as an array of `[re, im]` pairs; on input each
/// coordinate may also be a bare real number, and a 1-D point may be a bare number.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PointRepr", into = "Vec<Complex64>")]
pub struct CPoint {
    coords: Vec<Complex64>,
}

impl CPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }

    pub fn from_slice(coords: &[Complex64]) -> Self {
        Self {
            coords: coords.to_vec(),
        }
    }

    /// Point with real coordinates.
    pub fn real(coords: &[f64]) -> Self {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn origin(dim: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Euclidean norm squared, Σ|z_j|².
    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.coords)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coords.iter().map(|c| c * s).collect())
    }
}

impl Deref for CPoint {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.coords
    }
}

impl From<Vec<Complex64>> for CPoint {
    fn from(coords: Vec<Complex64>) -> Self {
        Self::new(coords)
    }
}

impl From<CPoint> for Vec<Complex64> {
    fn from(p: CPoint) -> Self {
        p.coords
    }
}

impl From<Complex64> for CPoint {
    fn from(z: Complex64) -> Self {
        Self::new(vec![z])
    }
}

impl fmt::Debug for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_coords(&self.coords))
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_coords(&self.coords))
    }
}

/// A vector X = Σ X_j ∂/∂z_j of T^{1,0} at `base`. The zero vector is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: CPoint,
    #[serde(with = "cvec")]
    pub dir: Vec<Complex64>,
}

impl TangentVector {
    pub fn new(base: CPoint, dir: Vec<Complex64>) -> Result<Self> {
        if dir.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: dir.len(),
            });
        }
        Ok(Self { base, dir })
    }

    pub fn is_zero(&self) -> bool {
        self.dir.iter().all(|c| c.norm_sqr() == 0.0)
    }
}

/// Input form of a complex number: `x` or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Real(f64),
    Pair(f64, f64),
}

impl From<ComplexRepr> for Complex64 {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Real(x) => Complex64::new(x, 0.0),
            ComplexRepr::Pair(re, im) => Complex64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Coords(Vec<ComplexRepr>),
    Scalar(ComplexRepr),
}

impl From<PointRepr> for CPoint {
    fn from(r: PointRepr) -> Self {
        match r {
            PointRepr::Coords(v) => CPoint::new(v.into_iter().map(Into::into).collect()),
            PointRepr::Scalar(c) => CPoint::new(vec![c.into()]),
        }
    }
}

/// Serde adapter for a complex field: written as `[re, im]`, read as `x` or `[re, im]`.
pub mod cnum {
    use super::ComplexRepr;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        (z.re, z.im).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(ComplexRepr::deserialize(d)?.into())
    }
}

/// Serde adapter for a vector of complex numbers, as [`cnum`].
pub mod cvec {
    use super::ComplexRepr;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, f64)> = v.iter().map(|z| (z.re, z.im)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<ComplexRepr>::deserialize(d)?
            .into_iter()
            .map(Into::into)
            .collect())
    }
}

pub(crate) fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e6).
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Formats a complex number as `a+bi` using [`fmt_real`] for each part.
pub fn fmt_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", fmt_real(z.re), fmt_real(-z.im))
    } else {
        format!("{}+{}i", fmt_real(z.re), fmt_real(z.im))
    }
}

/// Formats coordinates as `(a+bi;c+di)`.
pub fn fmt_coords(z: &[Complex64]) -> String {
    let parts: Vec<String> = z.iter().map(|&c| fmt_complex(c)).collect();
    format!("({})", parts.join(";"))
}
