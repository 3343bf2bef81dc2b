//! Holomorphic maps from a closed symbolic family (polynomials, disc Möbius
//! maps and their compositions) with exact forward-mode Jacobians.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::point::{check_dim, cnum, fmt_coords, CPoint};
use crate::quadrature::QuadRule;

/// One component expression in the source coordinates.
///
/// JSON forms: `{"var":0}`, `{"const":[re,im]}` (or a bare number),
/// `{"add":[...]}`, `{"mul":[...]}`, `{"pow":{"base":e,"exp":k}}`,
/// `{"mobius":{"a":[re,im],"arg":e}}` for (u − a)/(1 − ā u).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Expr {
    Var(usize),
    Const(#[serde(with = "cnum")] Complex64),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow { base: Box<Expr>, exp: u32 },
    Mobius {
        #[serde(with = "cnum")]
        a: Complex64,
        arg: Box<Expr>,
    },
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn constant(c: Complex64) -> Self {
        Expr::Const(c)
    }

    pub fn scaled(c: Complex64, e: Expr) -> Self {
        Expr::Mul(vec![Expr::Const(c), e])
    }

    pub fn pow(base: Expr, exp: u32) -> Self {
        Expr::Pow {
            base: Box::new(base),
            exp,
        }
    }

    pub fn mobius(a: Complex64, arg: Expr) -> Self {
        Expr::Mobius {
            a,
            arg: Box::new(arg),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Add(v) | Expr::Mul(v) => v.iter().filter_map(Expr::max_var).max(),
            Expr::Pow { base, .. } => base.max_var(),
            Expr::Mobius { arg, .. } => arg.max_var(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Expr::Add(v) | Expr::Mul(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidArgument("empty add/mul expression".into()));
                }
                v.iter().try_for_each(Expr::validate)
            }
            Expr::Pow { base, .. } => base.validate(),
            Expr::Mobius { a, arg } => {
                if !(a.norm() < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "Möbius parameter {a} must lie in the unit disc"
                    )));
                }
                arg.validate()
            }
            Expr::Var(_) | Expr::Const(_) => Ok(()),
        }
    }

    /// Value and gradient ∂/∂z_j at z.
    pub fn eval_grad(&self, z: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let n = z.len();
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Expr::Var(i) => {
                let mut g = vec![zero; n];
                g[*i] = Complex64::new(1.0, 0.0);
                (z[*i], g)
            }
            Expr::Const(c) => (*c, vec![zero; n]),
            Expr::Add(terms) => {
                let mut v = zero;
                let mut g = vec![zero; n];
                for t in terms {
                    let (tv, tg) = t.eval_grad(z);
                    v += tv;
                    for (a, b) in g.iter_mut().zip(tg) {
                        *a += b;
                    }
                }
                (v, g)
            }
            Expr::Mul(factors) => {
                let mut v = Complex64::new(1.0, 0.0);
                let mut g = vec![zero; n];
                for f in factors {
                    let (fv, fg) = f.eval_grad(z);
                    for (a, b) in g.iter_mut().zip(fg) {
                        *a = *a * fv + v * b;
                    }
                    v *= fv;
                }
                (v, g)
            }
            Expr::Pow { base, exp } => {
                let (bv, bg) = base.eval_grad(z);
                if *exp == 0 {
                    return (Complex64::new(1.0, 0.0), vec![zero; n]);
                }
                let lower = bv.powu(exp - 1);
                let d = lower * (*exp as f64);
                (lower * bv, bg.into_iter().map(|x| x * d).collect())
            }
            Expr::Mobius { a, arg } => {
                let (u, ug) = arg.eval_grad(z);
                let den = 1.0 - a.conj() * u;
                let v = (u - a) / den;
                let d = (1.0 - a.norm_sqr()) / (den * den);
                (v, ug.into_iter().map(|x| x * d).collect())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "z{i}"),
            Expr::Const(c) => write!(f, "{}", crate::point::fmt_complex(*c)),
            Expr::Add(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            Expr::Mul(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", parts.join("·"))
            }
            Expr::Pow { base, exp } => write!(f, "{base}^{exp}"),
            Expr::Mobius { a, arg } => write!(f, "φ[{}]({arg})", crate::point::fmt_complex(*a)),
        }
    }
}

/// Map components as they appear in scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub components: Vec<Expr>,
}

/// A holomorphic map Ω₁ → Ω₂ from the symbolic family.
#[derive(Clone, Debug)]
pub struct MapSpec {
    pub name: String,
    source: DomainSpec,
    target: DomainSpec,
    components: Vec<Expr>,
}

impl MapSpec {
    pub fn new(
        name: impl Into<String>,
        source: DomainSpec,
        target: DomainSpec,
        components: Vec<Expr>,
    ) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: components.len(),
            });
        }
        for c in &components {
            c.validate()?;
            if let Some(i) = c.max_var() {
                if i >= source.dim() {
                    return Err(Error::InvalidArgument(format!(
                        "component {c} uses z{i} but the source has dimension {}",
                        source.dim()
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            source,
            target,
            components,
        })
    }

    pub fn from_json(json: &MapJson, source: DomainSpec, target: DomainSpec) -> Result<Self> {
        let name = json.name.clone().unwrap_or_else(|| "map".to_string());
        Self::new(name, source, target, json.components.clone())
    }

    pub fn to_json(&self) -> MapJson {
        MapJson {
            name: Some(self.name.clone()),
            components: self.components.clone(),
        }
    }

    pub fn source(&self) -> &DomainSpec {
        &self.source
    }

    pub fn target(&self) -> &DomainSpec {
        &self.target
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|c| c.max_var().is_none())
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<CPoint> {
        check_dim(self.source.dim(), z.len())?;
        Ok(CPoint::new(
            self.components.iter().map(|c| c.eval_grad(z).0).collect(),
        ))
    }

    /// f(z) and J with J[i][j] = ∂f_i/∂z_j.
    pub fn jacobian(&self, z: &[Complex64]) -> Result<(CPoint, CMatrix)> {
        check_dim(self.source.dim(), z.len())?;
        let m = self.target.dim();
        let n = self.source.dim();
        let mut image = Vec::with_capacity(m);
        let mut jac = CMatrix::zeros(m, n);
        for (i, c) in self.components.iter().enumerate() {
            let (v, g) = c.eval_grad(z);
            image.push(v);
            for (j, d) in g.into_iter().enumerate() {
                jac[(i, j)] = d;
            }
        }
        Ok((CPoint::new(image), jac))
    }

    /// f(z) and df_z(X).
    pub fn push_forward(&self, z: &[Complex64], x: &[Complex64]) -> Result<(CPoint, Vec<Complex64>)> {
        check_dim(self.source.dim(), x.len())?;
        let (image, jac) = self.jacobian(z)?;
        let dfx = (0..jac.nrows())
            .map(|i| (0..jac.ncols()).map(|j| jac[(i, j)] * x[j]).sum())
            .collect();
        Ok((image, dfx))
    }

    /// f(z), failing when the image is not strictly inside the target.
    pub fn image_inside(&self, z: &[Complex64]) -> Result<CPoint> {
        let w = self.eval(z)?;
        if !self.target.contains_unchecked(&w) {
            return Err(Error::MapOutsideTarget {
                point: fmt_coords(z),
                image: w.to_string(),
            });
        }
        Ok(w)
    }

    /// Checks that every node of `rule` maps strictly inside the target.
    pub fn check_containment(&self, rule: &QuadRule) -> Result<()> {
        check_dim(self.source.dim(), rule.dim())?;
        for p in rule.nodes() {
            self.image_inside(p)?;
        }
        Ok(())
    }

    /// Möbius parameters a_j when the map is z ↦ (φ_{a_1}(z_1), …, φ_{a_n}(z_n))
    /// on a disc or polydisc onto itself; the identity counts as a = 0.
    pub fn as_mobius_product(&self) -> Result<Vec<Complex64>> {
        let n = self.source.dim();
        let polydisc = |d: &DomainSpec| d.is_polydisc_like() && d.dim() == n;
        if !(polydisc(&self.source) && polydisc(&self.target)) {
            return Err(Error::NotBiholomorphism(format!(
                "{}: only coordinatewise Möbius maps of a polydisc onto itself are certified",
                self.name
            )));
        }
        self.components
            .iter()
            .enumerate()
            .map(|(j, c)| match c {
                Expr::Var(i) if *i == j => Ok(Complex64::new(0.0, 0.0)),
                Expr::Mobius { a, arg } if **arg == Expr::Var(j) => Ok(*a),
                other => Err(Error::NotBiholomorphism(format!(
                    "{}: component {j} is {other}, not a Möbius map of z{j}",
                    self.name
                ))),
            })
            .collect()
    }

    pub fn identity(domain: DomainSpec) -> Result<Self> {
        let comps = (0..domain.dim()).map(Expr::Var).collect();
        Self::new("identity", domain.clone(), domain, comps)
    }

    /// Coordinatewise Möbius map of the polydisc with parameters `a`.
    pub fn mobius_product(a: &[Complex64]) -> Result<Self> {
        let d = if a.len() == 1 {
            DomainSpec::disc()
        } else {
            DomainSpec::polydisc(a.len())?
        };
        let comps = a
            .iter()
            .enumerate()
            .map(|(j, &aj)| Expr::mobius(aj, Expr::Var(j)))
            .collect();
        Self::new("mobius", d.clone(), d, comps)
    }

    pub fn constant(source: DomainSpec, target: DomainSpec, value: &[Complex64]) -> Result<Self> {
        let comps = value.iter().map(|&c| Expr::Const(c)).collect();
        Self::new("constant", source, target, comps)
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|e| e.to_string()).collect();
        write!(f, "{}: {} -> {}, z ↦ ({})", self.name, self.source, self.target, parts.join(", "))
    }
}
