//! Quadrature rules that discretize Lebesgue measure on the supported domains.
//!
//! * Disc: radial Gauss-Legendre in u = r² (so monomials in |z|² are polynomials
//!   in u) times an equispaced angular rule with 2·order half-shifted angles.
//! * Ball in ℂⁿ, n ≥ 2: the same angular tensor per coordinate, with the
//!   radial variables (u₁,…,uₙ) on the simplex mapped from the unit cube by
//!   the collapsed (conical-product) transformation.
//! * Annulus: Gauss-Legendre in t = log r, which integrates the Laurent
//!   weights r^{2k} as smooth exponentials.
//! * Products: tensor product of the factor rules.
//! * General domains: tensor Gauss-Legendre over the bounding box, filtered by
//!   the indicator. Weights are not renormalized.
//!
//! Every sum goes through [`pairwise_reduce`], whose summation tree depends
//! only on the number of terms.

use std::f64::consts::PI;
use std::ops::Range;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::point::fmt_coords;

const LEAF: usize = 32;
const PARALLEL_CUTOFF: usize = 1 << 14;

/// Reduces `0..n` over a fixed binary tree: ranges of at most `leaf_len` are
/// handed to `leaf`, partial results are combined bottom-up. The tree shape
/// depends only on `n` and `leaf_len`, so the result is independent of the
/// number of worker threads.
pub fn pairwise_reduce<T, L, C>(n: usize, leaf_len: usize, leaf: &L, combine: &C) -> T
where
    T: Send,
    L: Fn(Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    fn rec<T, L, C>(lo: usize, hi: usize, leaf_len: usize, leaf: &L, combine: &C) -> T
    where
        T: Send,
        L: Fn(Range<usize>) -> T + Sync,
        C: Fn(T, T) -> T + Sync,
    {
        if hi - lo <= leaf_len {
            return leaf(lo..hi);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, b) = if hi - lo >= PARALLEL_CUTOFF {
            rayon::join(
                || rec(lo, mid, leaf_len, leaf, combine),
                || rec(mid, hi, leaf_len, leaf, combine),
            )
        } else {
            (
                rec(lo, mid, leaf_len, leaf, combine),
                rec(mid, hi, leaf_len, leaf, combine),
            )
        };
        combine(a, b)
    }
    rec(0, n, leaf_len.max(1), leaf, combine)
}

/// Pairwise sum of real values.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_reduce(
        values.len(),
        LEAF,
        &|r: Range<usize>| values[r].iter().sum::<f64>(),
        &|a, b| a + b,
    )
}

/// Pairwise sum of complex values.
pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    pairwise_reduce(
        values.len(),
        LEAF,
        &|r: Range<usize>| values[r].iter().sum::<Complex64>(),
        &|a, b| a + b,
    )
}

/// Nodes and positive weights discretizing dV on a domain.
#[derive(Clone, Debug)]
pub struct QuadRule {
    dim: usize,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    order: usize,
    exact_degree: Option<usize>,
    domain: DomainSpec,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, i: usize) -> &[Complex64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[Complex64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Largest total degree in (z, z̄) for which monomials z^α z̄^β are
    /// integrated exactly (for the annulus: Laurent monomials, to machine
    /// precision). `None` for indicator-filtered rules.
    pub fn exact_degree(&self) -> Option<usize> {
        self.exact_degree
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// Σ weights, the rule's approximation of vol(Ω).
    pub fn volume(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// Builds a rule whose size grows with `order`.
pub fn build_rule(domain: &DomainSpec, order: usize) -> Result<QuadRule> {
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
    }
    let (nodes, weights, exact_degree) = build_parts(domain, order)?;
    if weights.is_empty() {
        return Err(Error::DegenerateDomain { candidates: 0 });
    }
    Ok(QuadRule {
        dim: domain.dim(),
        nodes,
        weights,
        order,
        exact_degree,
        domain: domain.clone(),
    })
}

type Parts = (Vec<Complex64>, Vec<f64>, Option<usize>);

fn build_parts(domain: &DomainSpec, order: usize) -> Result<Parts> {
    match domain {
        DomainSpec::Ball { dim: 1 } => Ok(disc_rule(order)),
        DomainSpec::Ball { dim } => Ok(ball_rule(*dim, order)),
        DomainSpec::Annulus { inner } => Ok(annulus_rule(*inner, order)),
        DomainSpec::Polydisc { dim } => {
            let disc = disc_rule(order);
            let mut acc = disc.clone();
            for _ in 1..*dim {
                acc = tensor(&acc, acc_dim(&acc), &disc, 1);
            }
            Ok(acc)
        }
        DomainSpec::Product(factors) => {
            let mut acc: Option<(Parts, usize)> = None;
            for f in factors {
                let part = build_parts(f, order)?;
                acc = Some(match acc {
                    None => (part, f.dim()),
                    Some((a, da)) => (tensor(&a, da, &part, f.dim()), da + f.dim()),
                });
            }
            Ok(acc.expect("product has factors").0)
        }
        DomainSpec::General(_) => general_rule(domain, order),
    }
}

fn acc_dim(parts: &Parts) -> usize {
    parts.0.len() / parts.1.len()
}

/// Gauss-Legendre nodes and weights on [a, b].
pub(crate) fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    if n == 1 {
        return vec![(mid, 2.0 * half)];
    }
    let rule = GaussLegendre::new(n).expect("n >= 2");
    let mut pts: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    pts
}

fn angles(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 2.0 * PI * (k as f64 + 0.5) / count as f64)
        .collect()
}

fn disc_rule(order: usize) -> Parts {
    let radial = gauss_legendre(order, 0.0, 1.0);
    let n_theta = 2 * order;
    let thetas = angles(n_theta);
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(radial.len() * n_theta);
    let mut weights = Vec::with_capacity(radial.len() * n_theta);
    for &(u, wu) in &radial {
        let r = u.sqrt();
        for &t in &thetas {
            nodes.push(Complex64::from_polar(r, t));
            weights.push(0.5 * wu * dtheta);
        }
    }
    (nodes, weights, Some(2 * order - 1))
}

fn ball_rule(dim: usize, order: usize) -> Parts {
    let s_rule = gauss_legendre(order, 0.0, 1.0);
    let n_theta = 2 * order;
    let thetas = angles(n_theta);
    let dtheta = 2.0 * PI / n_theta as f64;
    let ang_w = (0.5 * dtheta).powi(dim as i32);

    let mut radial: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let mut u = vec![0.0; dim];
        let mut remaining = 1.0;
        let mut w = 1.0;
        for k in 0..dim {
            let (s, ws) = s_rule[idx[k]];
            // ∂u_k/∂s_k = Π_{l<k}(1 - s_l); the map is triangular.
            u[k] = remaining * s;
            w *= ws * remaining;
            remaining *= 1.0 - s;
        }
        radial.push((u, w));
        if !advance(&mut idx, order) {
            break;
        }
    }

    let mut nodes = Vec::with_capacity(radial.len() * n_theta.pow(dim as u32) * dim);
    let mut weights = Vec::with_capacity(radial.len() * n_theta.pow(dim as u32));
    let mut aidx = vec![0usize; dim];
    for (u, w) in &radial {
        let r: Vec<f64> = u.iter().map(|x| x.sqrt()).collect();
        aidx.iter_mut().for_each(|a| *a = 0);
        loop {
            for k in 0..dim {
                nodes.push(Complex64::from_polar(r[k], thetas[aidx[k]]));
            }
            weights.push(w * ang_w);
            if !advance(&mut aidx, n_theta) {
                break;
            }
        }
    }
    let exact = (2 * order - 1).min((4 * order).saturating_sub(2 * dim));
    (nodes, weights, Some(exact))
}

fn annulus_rule(inner: f64, order: usize) -> Parts {
    let log_width = -inner.ln();
    let radial = gauss_legendre(order, inner.ln(), 0.0);
    let n_theta = 2 * order;
    let thetas = angles(n_theta);
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(radial.len() * n_theta);
    let mut weights = Vec::with_capacity(radial.len() * n_theta);
    for &(t, wt) in &radial {
        let r = t.exp();
        for &th in &thetas {
            nodes.push(Complex64::from_polar(r, th));
            weights.push(wt * r * r * dtheta);
        }
    }
    // Laurent weights r^{2k} dV become e^{(2k+2)t} dt; Gauss-Legendre resolves
    // them to machine precision while (2|k|+2)·log(1/r) ≤ order.
    let kmax = ((order as f64 / log_width - 2.0) / 2.0).floor().max(0.0) as usize;
    let exact = (2 * order - 1).min(2 * kmax);
    (nodes, weights, Some(exact))
}

fn general_rule(domain: &DomainSpec, order: usize) -> Result<Parts> {
    let bbox = domain.bounding_box();
    let dim = domain.dim();
    let axes: Vec<Vec<(f64, f64)>> = bbox
        .iter()
        .map(|&(lo, hi)| gauss_legendre(order, lo, hi))
        .collect();
    let mut idx = vec![0usize; 2 * dim];
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut candidates = 0usize;
    let mut p = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        candidates += 1;
        let mut w = 1.0;
        for j in 0..dim {
            let (x, wx) = axes[2 * j][idx[2 * j]];
            let (y, wy) = axes[2 * j + 1][idx[2 * j + 1]];
            p[j] = Complex64::new(x, y);
            w *= wx * wy;
        }
        if domain.contains_unchecked(&p) {
            nodes.extend_from_slice(&p);
            weights.push(w);
        }
        if !advance(&mut idx, order) {
            break;
        }
    }
    if weights.is_empty() {
        return Err(Error::DegenerateDomain { candidates });
    }
    Ok((nodes, weights, None))
}

fn tensor(a: &Parts, da: usize, b: &Parts, db: usize) -> Parts {
    let (an, aw, ae) = a;
    let (bn, bw, be) = b;
    let mut nodes = Vec::with_capacity(aw.len() * bw.len() * (da + db));
    let mut weights = Vec::with_capacity(aw.len() * bw.len());
    for (i, &wa) in aw.iter().enumerate() {
        let pa = &an[i * da..(i + 1) * da];
        for (j, &wb) in bw.iter().enumerate() {
            nodes.extend_from_slice(pa);
            nodes.extend_from_slice(&bn[j * db..(j + 1) * db]);
            weights.push(wa * wb);
        }
    }
    let exact = match (ae, be) {
        (Some(x), Some(y)) => Some((*x).min(*y)),
        _ => None,
    };
    (nodes, weights, exact)
}

/// Odometer increment over `[0, base)^k`; false once it wraps around.
fn advance(idx: &mut [usize], base: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < base {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Σ_j w_j f(node_j), reduced pairwise. A non-finite value is an error naming the node.
pub fn integrate<F>(rule: &QuadRule, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    integrate_with(rule, |p| Ok(f(p)))
}

/// As [`integrate`] for a fallible integrand.
pub fn integrate_with<F>(rule: &QuadRule, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    pairwise_reduce(
        rule.len(),
        LEAF,
        &|r: Range<usize>| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in r {
                let p = rule.node(i);
                let v = f(p)?;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite {
                        index: i,
                        point: fmt_coords(p),
                        value: v.to_string(),
                    });
                }
                acc += v * rule.weight(i);
            }
            Ok(acc)
        },
        &|a: Result<Complex64>, b: Result<Complex64>| Ok(a? + b?),
    )
}

/// A rule together with its refinement at twice the order; moments report the
/// difference between the two as their discretization estimate.
#[derive(Clone, Debug)]
pub struct RefinedRule {
    pub coarse: QuadRule,
    pub fine: QuadRule,
}

impl RefinedRule {
    pub fn new(domain: &DomainSpec, order: usize) -> Result<Self> {
        Ok(Self {
            coarse: build_rule(domain, order)?,
            fine: build_rule(domain, 2 * order)?,
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        self.fine.domain()
    }

    pub fn order(&self) -> usize {
        self.coarse.order()
    }
}
