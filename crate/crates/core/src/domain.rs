//! Bounded domains in ℂⁿ.
//!
//! Closed-form families (ball, polydisc, annulus, products) carry exact
//! containment tests; general domains are an indicator predicate on the real
//! coordinates (x₁, y₁, …, xₙ, yₙ) together with a finite bounding box.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{check_dim, fmt_coords, norm_sqr};

type IndicatorFn = dyn Fn(&[Complex64]) -> bool + Send + Sync;

/// Indicator of a general domain.
#[derive(Clone)]
pub enum Indicator {
    /// Real ellipsoid Σ (t_i / a_i)² < 1 over the 2n real coordinates.
    Ellipsoid(Vec<f64>),
    /// Arbitrary predicate. Not serializable.
    Custom(Arc<IndicatorFn>),
}

impl Indicator {
    fn test(&self, p: &[Complex64]) -> bool {
        match self {
            Indicator::Ellipsoid(axes) => {
                let mut s = 0.0;
                for (j, c) in p.iter().enumerate() {
                    s += (c.re / axes[2 * j]).powi(2) + (c.im / axes[2 * j + 1]).powi(2);
                }
                s < 1.0
            }
            Indicator::Custom(f) => f(p),
        }
    }
}

impl fmt::Debug for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indicator::Ellipsoid(a) => write!(f, "Ellipsoid({a:?})"),
            Indicator::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A domain given by an indicator and a real bounding box `[lo, hi]` per real coordinate.
#[derive(Clone, Debug)]
pub struct GeneralDomain {
    dim: usize,
    bbox: Vec<(f64, f64)>,
    indicator: Indicator,
}

impl GeneralDomain {
    pub fn new(dim: usize, bbox: Vec<(f64, f64)>, indicator: Indicator) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if bbox.len() != 2 * dim {
            return Err(Error::InvalidDomain(format!(
                "bounding box needs {} intervals, got {}",
                2 * dim,
                bbox.len()
            )));
        }
        if bbox
            .iter()
            .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return Err(Error::InvalidDomain("bounding box must be finite and non-empty".into()));
        }
        if let Indicator::Ellipsoid(axes) = &indicator {
            if axes.len() != 2 * dim || axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                return Err(Error::InvalidDomain(
                    "ellipsoid needs 2n positive semi-axes".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            bbox,
            indicator,
        })
    }

    /// Ellipsoid with the given semi-axes and its tight bounding box.
    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        if axes.len() % 2 != 0 || axes.is_empty() {
            return Err(Error::InvalidDomain(
                "ellipsoid needs an even, non-zero number of semi-axes".into(),
            ));
        }
        let bbox = axes.iter().map(|&a| (-a, a)).collect();
        Self::new(axes.len() / 2, bbox, Indicator::Ellipsoid(axes))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bbox(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    pub fn indicator(&self) -> &Indicator {
        &self.indicator
    }

    fn contains(&self, p: &[Complex64]) -> bool {
        let in_box = p.iter().enumerate().all(|(j, c)| {
            let (xl, xh) = self.bbox[2 * j];
            let (yl, yh) = self.bbox[2 * j + 1];
            c.re > xl && c.re < xh && c.im > yl && c.im < yh
        });
        in_box && self.indicator.test(p)
    }
}

/// A bounded domain in ℂⁿ.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DomainJson", into = "DomainJson")]
pub enum DomainSpec {
    /// Unit ball {Σ|z_j|² < 1} in ℂⁿ; `Ball { dim: 1 }` is the unit disc.
    Ball { dim: usize },
    /// Unit polydisc {max |z_j| < 1} in ℂⁿ.
    Polydisc { dim: usize },
    /// Annulus {r < |z| < 1} in ℂ.
    Annulus { inner: f64 },
    /// Cartesian product; coordinates are concatenated in factor order.
    Product(Vec<DomainSpec>),
    General(GeneralDomain),
}

impl DomainSpec {
    pub fn ball(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("ball dimension must be positive".into()));
        }
        Ok(DomainSpec::Ball { dim })
    }

    pub fn disc() -> Self {
        DomainSpec::Ball { dim: 1 }
    }

    pub fn polydisc(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("polydisc dimension must be positive".into()));
        }
        Ok(DomainSpec::Polydisc { dim })
    }

    pub fn annulus(inner: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < 1.0) {
            return Err(Error::InvalidDomain(format!(
                "annulus inner radius must lie in (0,1), got {inner}"
            )));
        }
        Ok(DomainSpec::Annulus { inner })
    }

    pub fn product(factors: Vec<DomainSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDomain("product needs at least one factor".into()));
        }
        Ok(DomainSpec::Product(factors))
    }

    pub fn general(domain: GeneralDomain) -> Self {
        DomainSpec::General(domain)
    }

    /// Complex dimension n.
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { dim } | DomainSpec::Polydisc { dim } => *dim,
            DomainSpec::Annulus { .. } => 1,
            DomainSpec::Product(fs) => fs.iter().map(DomainSpec::dim).sum(),
            DomainSpec::General(g) => g.dim,
        }
    }

    /// True iff `p` lies in the open domain.
    pub fn contains(&self, p: &[Complex64]) -> Result<bool> {
        check_dim(self.dim(), p.len())?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &[Complex64]) -> bool {
        match self {
            DomainSpec::Ball { .. } => norm_sqr(p) < 1.0,
            DomainSpec::Polydisc { .. } => p.iter().all(|c| c.norm_sqr() < 1.0),
            DomainSpec::Annulus { inner } => {
                let m = p[0].norm();
                m > *inner && m < 1.0
            }
            DomainSpec::Product(fs) => {
                let mut off = 0;
                fs.iter().all(|f| {
                    let d = f.dim();
                    let ok = f.contains_unchecked(&p[off..off + d]);
                    off += d;
                    ok
                })
            }
            DomainSpec::General(g) => g.contains(p),
        }
    }

    /// Error unless `p` lies in the open domain.
    pub fn require_interior(&self, p: &[Complex64]) -> Result<()> {
        if self.contains(p)? {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: fmt_coords(p),
                domain: self.to_string(),
            })
        }
    }

    /// Irreducible coordinate blocks with their offsets. Polydiscs split into discs
    /// and products are flattened.
    pub fn blocks(&self) -> Vec<(usize, DomainSpec)> {
        let mut out = Vec::new();
        self.push_blocks(0, &mut out);
        out
    }

    fn push_blocks(&self, offset: usize, out: &mut Vec<(usize, DomainSpec)>) {
        match self {
            DomainSpec::Polydisc { dim } => {
                for j in 0..*dim {
                    out.push((offset + j, DomainSpec::disc()));
                }
            }
            DomainSpec::Product(fs) => {
                let mut off = offset;
                for f in fs {
                    f.push_blocks(off, out);
                    off += f.dim();
                }
            }
            other => out.push((offset, other.clone())),
        }
    }

    /// True when every block is a disc (the domain is a polydisc up to bookkeeping).
    pub fn is_polydisc_like(&self) -> bool {
        self.blocks()
            .iter()
            .all(|(_, b)| matches!(b, DomainSpec::Ball { dim: 1 }))
    }

    /// Real bounding box, one interval per real coordinate.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            DomainSpec::General(g) => g.bbox.clone(),
            DomainSpec::Product(fs) => fs.iter().flat_map(DomainSpec::bounding_box).collect(),
            other => vec![(-1.0, 1.0); 2 * other.dim()],
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Ball { dim } => write!(f, "ball({dim})"),
            DomainSpec::Polydisc { dim } => write!(f, "polydisc({dim})"),
            DomainSpec::Annulus { inner } => write!(f, "annulus({inner})"),
            DomainSpec::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|d| d.to_string()).collect();
                write!(f, "product[{}]", parts.join(","))
            }
            DomainSpec::General(g) => write!(f, "general({})", g.dim),
        }
    }
}

/// Wire form of a domain:
/// `{"kind":"ball"|"polydisc"|"annulus"|"product"|"general", "dim":n, "r":…, "factors":[…]}`.
/// General domains additionally carry `"ellipsoid":[a₁,…,a₂ₙ]` and an optional `"bbox"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<DomainSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ellipsoid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    indicator: Option<String>,
}

impl TryFrom<DomainJson> for DomainSpec {
    type Error = Error;

    fn try_from(j: DomainJson) -> Result<Self> {
        let need_dim = |j: &DomainJson| {
            j.dim
                .ok_or_else(|| Error::InvalidDomain(format!("{}: field `dim` is required", j.kind)))
        };
        let spec = match j.kind.as_str() {
            "ball" => DomainSpec::ball(need_dim(&j)?)?,
            "disc" => DomainSpec::disc(),
            "polydisc" => DomainSpec::polydisc(need_dim(&j)?)?,
            "annulus" => {
                let r = j
                    .r
                    .ok_or_else(|| Error::InvalidDomain("annulus: field `r` is required".into()))?;
                DomainSpec::annulus(r)?
            }
            "product" => DomainSpec::product(j.factors.clone().ok_or_else(|| {
                Error::InvalidDomain("product: field `factors` is required".into())
            })?)?,
            "general" => {
                let axes = j.ellipsoid.clone().ok_or_else(|| {
                    Error::InvalidDomain(
                        "general: only ellipsoid indicators (`ellipsoid`) can be read from JSON"
                            .into(),
                    )
                })?;
                let g = match j.bbox.clone() {
                    Some(bbox) => GeneralDomain::new(
                        axes.len() / 2,
                        bbox,
                        Indicator::Ellipsoid(axes),
                    )?,
                    None => GeneralDomain::ellipsoid(axes)?,
                };
                DomainSpec::General(g)
            }
            other => return Err(Error::InvalidDomain(format!("unknown domain kind `{other}`"))),
        };
        if let Some(d) = j.dim {
            if d != spec.dim() {
                return Err(Error::InvalidDomain(format!(
                    "declared dim {d} does not match {spec} (dim {})",
                    spec.dim()
                )));
            }
        }
        Ok(spec)
    }
}

impl From<DomainSpec> for DomainJson {
    fn from(d: DomainSpec) -> Self {
        let mut j = DomainJson {
            kind: String::new(),
            dim: Some(d.dim()),
            r: None,
            factors: None,
            ellipsoid: None,
            bbox: None,
            indicator: None,
        };
        match d {
            DomainSpec::Ball { .. } => j.kind = "ball".into(),
            DomainSpec::Polydisc { .. } => j.kind = "polydisc".into(),
            DomainSpec::Annulus { inner } => {
                j.kind = "annulus".into();
                j.r = Some(inner);
            }
            DomainSpec::Product(fs) => {
                j.kind = "product".into();
                j.factors = Some(fs);
            }
            DomainSpec::General(g) => {
                j.kind = "general".into();
                j.bbox = Some(g.bbox.clone());
                match g.indicator {
                    Indicator::Ellipsoid(a) => j.ellipsoid = Some(a),
                    Indicator::Custom(_) => j.indicator = Some("custom".into()),
                }
            }
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_membership() {
        let d = DomainSpec::disc();
        assert!(d.contains(&[c(0.0, 0.0)]).unwrap());
        assert!(!d.contains(&[c(1.0, 0.0)]).unwrap());
    }

    #[test]
    fn annulus_membership() {
        let a = DomainSpec::annulus(0.5).unwrap();
        assert!(a.contains(&[c(0.7, 0.0)]).unwrap());
        assert!(!a.contains(&[c(0.3, 0.0)]).unwrap());
        assert!(!a.contains(&[c(0.5, 0.0)]).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = DomainSpec::ball(2).unwrap();
        assert!(matches!(
            d.contains(&[c(0.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn annulus_radius_validated() {
        assert!(DomainSpec::annulus(0.0).is_err());
        assert!(DomainSpec::annulus(1.0).is_err());
    }

    #[test]
    fn ball_versus_polydisc() {
        let p = [c(0.8, 0.0), c(0.0, 0.8)];
        assert!(!DomainSpec::ball(2).unwrap().contains(&p).unwrap());
        assert!(DomainSpec::polydisc(2).unwrap().contains(&p).unwrap());
    }

    #[test]
    fn product_blocks_flatten() {
        let d = DomainSpec::product(vec![
            DomainSpec::polydisc(2).unwrap(),
            DomainSpec::annulus(0.4).unwrap(),
        ])
        .unwrap();
        let blocks = d.blocks();
        assert_eq!(blocks.len(), 3);
        assert_eq!(blocks[2].0, 2);
        assert!(d.contains(&[c(0.1, 0.0), c(0.2, 0.0), c(0.6, 0.0)]).unwrap());
        assert!(!d.contains(&[c(0.1, 0.0), c(0.2, 0.0), c(0.2, 0.0)]).unwrap());
    }

    #[test]
    fn json_fragment_round_trips() {
        let src = r#"{"kind":"product","factors":[{"kind":"ball","dim":1},{"kind":"annulus","r":0.5}]}"#;
        let d: DomainSpec = serde_json::from_str(src).unwrap();
        assert_eq!(d.dim(), 2);
        let back: DomainSpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back.to_string(), d.to_string());
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"annulus","r":1.5}"#).is_err());
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"torus","dim":1}"#).is_err());
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"ball"}"#).is_err());
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"polydisc","dim":2,"r":1}"#).is_ok());
    }

    #[test]
    fn general_ellipsoid() {
        let g = GeneralDomain::ellipsoid(vec![1.0, 0.5]).unwrap();
        let d = DomainSpec::general(g);
        assert!(d.contains(&[c(0.9, 0.0)]).unwrap());
        assert!(!d.contains(&[c(0.0, 0.6)]).unwrap());
    }
}
