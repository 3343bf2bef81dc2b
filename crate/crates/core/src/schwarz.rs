//! Schwarz-lemma checks for holomorphic maps f: Ω₁ → Ω₂ between domains with
//! Bergman metrics.
//!
//! With Z = ∂_X log P₁(z,·) and W = ∂_X log P₂(f(z), f(·)) (the derivative acts
//! on z only; ξ enters through evaluation), the pointwise bound reads
//! (f*g₂(X,X))² ≤ Var[W]·g₁(X,X), with Cov[Z,W] = f*g₂(X,X).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::gradient::GradNormAt;
use crate::kernel::KernelHandle;
use crate::linalg::{min_eigenvalue, CMatrix};
use crate::maps::{Expr, MapSpec};
use crate::metric::metric_at;
use crate::point::{check_dim, cvec, CPoint};
use crate::quadrature::RefinedRule;
use crate::stats::{joint_moments, BerezinDensity, Integrand, MomentResult};

/// Tolerances for the Schwarz checks; all overridable from scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchwarzTolerances {
    /// Allowed negative slack c_f·g₁ − (f*g₂)².
    pub slack: f64,
    /// Floor for |Cov[Z,W] − f*g₂(X,X)|; the bound is max(this, 10·quad error).
    pub cov_residual: f64,
    /// Max spread of f*g₂/g₁ across samples for a λ-isometry.
    pub isometry_spread: f64,
    pub condition_d: f64,
    /// Allowed negative eigenvalue of C·g₁ − f*g₂.
    pub psd: f64,
    /// Relative |coarse − fine| above which a variance is reported as not converged.
    pub convergence: f64,
}

impl Default for SchwarzTolerances {
    fn default() -> Self {
        Self {
            slack: 1e-8,
            cov_residual: 1e-8,
            isometry_spread: 1e-6,
            condition_d: 1e-8,
            psd: 1e-8,
            convergence: 1e-6,
        }
    }
}

/// Kernels of Ω₁ and Ω₂, a refined rule on Ω₁ and tolerances.
#[derive(Clone, Debug)]
pub struct SchwarzContext {
    p1: BerezinDensity,
    p2: BerezinDensity,
    rule: RefinedRule,
    pub tol: SchwarzTolerances,
}

impl SchwarzContext {
    pub fn new(source: KernelHandle, target: KernelHandle, rule: RefinedRule) -> Result<Self> {
        check_dim(source.dim(), rule.coarse.dim())?;
        Ok(Self {
            p1: BerezinDensity::new(source),
            p2: BerezinDensity::new(target),
            rule,
            tol: SchwarzTolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: SchwarzTolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn source_kernel(&self) -> &KernelHandle {
        self.p1.kernel()
    }

    pub fn target_kernel(&self) -> &KernelHandle {
        self.p2.kernel()
    }

    pub fn rule(&self) -> &RefinedRule {
        &self.rule
    }

    /// Dimensions agree and every node of both rules maps inside Ω₂.
    pub fn check_map(&self, f: &MapSpec) -> Result<()> {
        check_dim(self.source_kernel().dim(), f.source().dim())?;
        check_dim(self.target_kernel().dim(), f.target().dim())?;
        f.check_containment(&self.rule.coarse)?;
        f.check_containment(&self.rule.fine)
    }
}

/// g₂(df X, df X) at f(z).
pub fn pullback_metric(f: &MapSpec, target: &KernelHandle, z: &CPoint, x: &[Complex64]) -> Result<f64> {
    let (w, dfx) = f.push_forward(z, x)?;
    let w = inside(f, z, w)?;
    metric_at(target, &w)?.norm_sqr(&dfx)
}

/// The pullback form as an n×n matrix Jᵀ G₂ J̄, in the same convention as g₁.
pub fn pullback_matrix(f: &MapSpec, target: &KernelHandle, z: &CPoint) -> Result<CMatrix> {
    let (w, jac) = f.jacobian(z)?;
    let w = inside(f, z, w)?;
    let g2 = metric_at(target, &w)?;
    Ok(jac.transpose() * &g2.matrix * jac.conjugate())
}

fn inside(f: &MapSpec, z: &CPoint, w: CPoint) -> Result<CPoint> {
    if !f.target().contains_unchecked(&w) {
        return Err(Error::MapOutsideTarget {
            point: z.to_string(),
            image: w.to_string(),
        });
    }
    Ok(w)
}

/// C_f(z,X) = Var[W] under P₁(z,·), with E[W] and a convergence flag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarianceBound {
    pub c_f: MomentResult,
    pub mean_w: MomentResult,
    /// False when the variance moved by more than the tolerance under refinement
    /// ("variance not finite at tolerance").
    pub converged: bool,
}

struct ScoreFns {
    diag1: crate::stats::DiagonalLogDerivative,
    diag2: crate::stats::DiagonalLogDerivative,
    x: Vec<Complex64>,
    dfx: Vec<Complex64>,
}

impl ScoreFns {
    fn new(f: &MapSpec, ctx: &SchwarzContext, z: &CPoint, x: &[Complex64]) -> Result<Self> {
        ctx.source_kernel().domain().require_interior(z)?;
        let (w, dfx) = f.push_forward(z, x)?;
        let w = inside(f, z, w)?;
        Ok(Self {
            diag1: ctx.p1.diagonal_log_derivative(z)?,
            diag2: ctx.p2.diagonal_log_derivative(&w)?,
            x: x.to_vec(),
            dfx,
        })
    }

    fn z(&self, ctx: &SchwarzContext, xi: &[Complex64]) -> Result<Complex64> {
        ctx.p1.dlogp_with(&self.diag1, &self.x, xi)
    }

    fn w(&self, ctx: &SchwarzContext, f: &MapSpec, xi: &[Complex64]) -> Result<Complex64> {
        if self.dfx.iter().all(|c| c.norm_sqr() == 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let fxi = f.eval(xi)?;
        ctx.p2.dlogp_with(&self.diag2, &self.dfx, &fxi)
    }
}

fn converged(m: &MomentResult, tol: &SchwarzTolerances) -> bool {
    m.quad_error_estimate <= tol.convergence * m.value.norm().max(1.0)
}

pub fn variance_bound(f: &MapSpec, ctx: &SchwarzContext, z: &CPoint, x: &[Complex64]) -> Result<VarianceBound> {
    let s = ScoreFns::new(f, ctx, z, x)?;
    let w = |xi: &[Complex64]| s.w(ctx, f, xi);
    let fns: [Integrand<'_>; 1] = [&w];
    let jm = joint_moments(&ctx.p1, &ctx.rule, z, &fns)?;
    let c_f = jm.cov(0, 0);
    Ok(VarianceBound {
        converged: converged(&c_f, &ctx.tol),
        c_f,
        mean_w: jm.means[0],
    })
}

/// One pointwise verification of the variance bound and the covariance identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzRecord {
    pub z: CPoint,
    #[serde(with = "cvec")]
    pub x: Vec<Complex64>,
    pub image: CPoint,
    /// f*g₂(X,X).
    pub pullback: f64,
    /// g₁(X,X).
    pub base_metric: f64,
    /// Var[W].
    pub c_f: f64,
    /// pullback².
    pub lhs: f64,
    /// c_f·base_metric.
    pub rhs: f64,
    pub slack: f64,
    /// |Cov[Z,W] − pullback|.
    pub cov_identity_residual: f64,
    /// pullback/base_metric (0 for a zero direction).
    pub lambda_estimate: f64,
    /// |E[W]|.
    pub mean_w: f64,
    /// Largest |coarse − fine| among the moments used.
    pub quad_error_estimate: f64,
    pub converged: bool,
    /// The covariance identity holds within max(tolerance, 10·quad error), or
    /// is not judged because df X = 0 or the variance did not converge.
    pub cov_identity_ok: bool,
    pub passed: bool,
}

pub fn verify_pointwise(f: &MapSpec, z: &CPoint, x: &[Complex64], ctx: &SchwarzContext) -> Result<SchwarzRecord> {
    check_dim(z.dim(), x.len())?;
    let s = ScoreFns::new(f, ctx, z, x)?;
    let g1 = metric_at(ctx.source_kernel(), z)?;
    let base_metric = g1.norm_sqr(x)?;
    let pullback = pullback_metric(f, ctx.target_kernel(), z, x)?;
    let zf = |xi: &[Complex64]| s.z(ctx, xi);
    let wf = |xi: &[Complex64]| s.w(ctx, f, xi);
    let fns: [Integrand<'_>; 2] = [&zf, &wf];
    let jm = joint_moments(&ctx.p1, &ctx.rule, z, &fns)?;
    let var_w = jm.cov(1, 1);
    let cov_zw = jm.cov(0, 1);
    let c_f = var_w.value.re;
    let lhs = pullback * pullback;
    let rhs = c_f * base_metric;
    let slack = rhs - lhs;
    let cov_identity_residual = (cov_zw.value - pullback).norm();
    let quad = var_w.quad_error_estimate.max(cov_zw.quad_error_estimate);
    let conv = converged(&var_w, &ctx.tol);
    let df_zero = s.dfx.iter().all(|c| c.norm_sqr() == 0.0);
    let cov_ok = df_zero
        || !conv
        || cov_identity_residual <= ctx.tol.cov_residual.max(10.0 * quad);
    Ok(SchwarzRecord {
        z: z.clone(),
        x: x.to_vec(),
        image: f.eval(z)?,
        pullback,
        base_metric,
        c_f,
        lhs,
        rhs,
        slack,
        cov_identity_residual,
        lambda_estimate: if base_metric > 0.0 { pullback / base_metric } else { 0.0 },
        mean_w: jm.means[1].value.norm(),
        quad_error_estimate: quad,
        converged: conv,
        cov_identity_ok: cov_ok,
        passed: slack >= -ctx.tol.slack && cov_ok,
    })
}

/// Outcome of testing f*g₂ = λ g₁ on a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    pub is_lambda_isometry: bool,
    pub lambda: f64,
    pub ratios: Vec<f64>,
    pub spread: f64,
    /// max over sampled pairs of |ρ₂(f z, f ξ) − ρ₁(z, ξ)^λ| with
    /// ρ(a,b) = |K(a,b)|²/(K(a,a)K(b,b)); only meaningful for λ-isometries.
    pub condition_d_residual: f64,
    /// All sampled images coincide.
    pub constant_on_sample: bool,
    /// Sampled images are pairwise distinct.
    pub injective_on_sample: bool,
    /// "constant", "injective", or "not a λ-isometry".
    pub classification: String,
    /// λ = 0 exactly for constant maps and λ > 0 exactly for injective ones.
    pub consistent: bool,
}

fn normalized_kernel(k: &KernelHandle, a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    Ok(k.value(a, b)?.norm_sqr() / (k.diagonal(a)? * k.diagonal(b)?))
}

pub fn equality_classifier(
    f: &MapSpec,
    sample: &[(CPoint, Vec<Complex64>)],
    ctx: &SchwarzContext,
) -> Result<EqualityReport> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("equality classifier needs samples".into()));
    }
    let k1 = ctx.source_kernel();
    let k2 = ctx.target_kernel();
    let mut ratios = Vec::with_capacity(sample.len());
    let mut images = Vec::with_capacity(sample.len());
    for (z, x) in sample {
        let g1 = metric_at(k1, z)?.norm_sqr(x)?;
        if !(g1 > 0.0) {
            return Err(Error::InvalidArgument(format!("zero direction at {z}")));
        }
        ratios.push(pullback_metric(f, k2, z, x)? / g1);
        images.push(f.image_inside(z)?);
    }
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    let spread = max - min;
    let lambda = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let is_iso = spread <= ctx.tol.isometry_spread;

    let mut cond_d: f64 = 0.0;
    let mut min_image_gap = f64::INFINITY;
    let mut max_image_gap: f64 = 0.0;
    for i in 0..sample.len() {
        for j in (i + 1)..sample.len() {
            let (zi, zj) = (&sample[i].0, &sample[j].0);
            let gap: f64 = images[i]
                .iter()
                .zip(images[j].iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if zi != zj {
                min_image_gap = min_image_gap.min(gap);
            }
            max_image_gap = max_image_gap.max(gap);
            if is_iso {
                let r1 = normalized_kernel(k1, zi, zj)?;
                let r2 = normalized_kernel(k2, &images[i], &images[j])?;
                cond_d = cond_d.max((r2 - r1.powf(lambda.max(0.0))).abs());
            }
        }
    }
    let constant = max_image_gap <= 1e-12;
    let injective = min_image_gap > 1e-12;
    let lambda_zero = lambda.abs() <= ctx.tol.isometry_spread;
    let classification = if !is_iso {
        "not a λ-isometry"
    } else if lambda_zero {
        "constant"
    } else {
        "injective"
    };
    let consistent = !is_iso || (lambda_zero == constant && !lambda_zero == injective);
    Ok(EqualityReport {
        is_lambda_isometry: is_iso,
        lambda,
        ratios,
        spread,
        condition_d_residual: cond_d,
        constant_on_sample: constant,
        injective_on_sample: injective,
        classification: classification.to_string(),
        consistent,
    })
}

/// Nested polar grids for pairs (w, ζ); level ℓ uses radial·2^ℓ radii and
/// angular·2^ℓ angles, so each level contains the previous one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub w_radius: f64,
    pub zeta_radius: f64,
    pub radial: usize,
    pub angular: usize,
    pub levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            w_radius: 0.9,
            zeta_radius: 0.99,
            radial: 5,
            angular: 10,
            levels: 2,
        }
    }
}

/// Directions along which polar grids are laid out in dimension > 1.
fn grid_directions(domain: &DomainSpec) -> Vec<Vec<Complex64>> {
    let n = domain.dim();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut dirs: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|k| if k == j { one } else { zero }).collect())
        .collect();
    if n > 1 {
        let s = if domain.is_polydisc_like() {
            1.0
        } else {
            1.0 / (n as f64).sqrt()
        };
        dirs.push(vec![one * s; n]);
    }
    dirs
}

/// Points r·e^{iθ}·u of a polar grid inside `domain`.
pub fn polar_grid(domain: &DomainSpec, radius: f64, radial: usize, angular: usize) -> Vec<CPoint> {
    let lo = match domain {
        DomainSpec::Annulus { inner } => *inner,
        _ => 0.0,
    };
    let mut out = Vec::new();
    for u in grid_directions(domain) {
        for i in 0..radial {
            let r = lo + (radius - lo) * (i + 1) as f64 / radial as f64;
            for k in 0..angular {
                let th = std::f64::consts::TAU * k as f64 / angular as f64;
                let e = Complex64::from_polar(r, th);
                let p: Vec<Complex64> = u.iter().map(|c| c * e).collect();
                if domain.contains_unchecked(&p) {
                    out.push(CPoint::new(p));
                }
            }
        }
    }
    out
}

/// Analytic sup of F over Ω×Ω: n+1 on the ball, 2 per disc factor, summed over products.
pub fn analytic_sup(domain: &DomainSpec) -> Option<f64> {
    match domain {
        DomainSpec::Ball { dim } => Some(*dim as f64 + 1.0),
        DomainSpec::Polydisc { dim } => Some(2.0 * *dim as f64),
        DomainSpec::Product(fs) => fs.iter().map(analytic_sup).sum(),
        _ => None,
    }
}

/// Grid lower bound for sup F with its refinement trend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalConstant {
    pub c_grid: f64,
    /// c per refinement level; nondecreasing because the grids are nested.
    pub refinement_trend: Vec<f64>,
    pub pairs: usize,
    pub analytic_sup: Option<f64>,
    pub argmax: (CPoint, CPoint),
}

pub fn global_constant(kernel: &KernelHandle, grid: &GridSpec) -> Result<GlobalConstant> {
    if grid.radial == 0 || grid.angular == 0 {
        return Err(Error::InvalidArgument("grid needs radial and angular points".into()));
    }
    let domain = kernel.domain();
    let mut trend = Vec::new();
    let mut best = (f64::MIN, CPoint::origin(0), CPoint::origin(0));
    let mut pairs = 0;
    for level in 0..grid.levels.max(1) {
        let scale = 1usize << level;
        let ws = polar_grid(domain, grid.w_radius, grid.radial * scale, grid.angular * scale);
        let zs = polar_grid(domain, grid.zeta_radius, grid.radial * scale, grid.angular * scale);
        pairs = ws.len() * zs.len();
        for w in &ws {
            let at = GradNormAt::new(kernel, w)?;
            for zeta in &zs {
                let f = at.norm(zeta)?;
                if f > best.0 {
                    best = (f, w.clone(), zeta.clone());
                }
            }
        }
        trend.push(best.0);
    }
    Ok(GlobalConstant {
        c_grid: best.0,
        refinement_trend: trend,
        pairs,
        analytic_sup: analytic_sup(domain),
        argmax: (best.1, best.2),
    })
}

/// min eigenvalue of C·g₁ − f*g₂ at each sample point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalCheck {
    pub c: f64,
    pub points: Vec<CPoint>,
    pub min_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

pub fn verify_global(f: &MapSpec, c: f64, points: &[CPoint], ctx: &SchwarzContext) -> Result<GlobalCheck> {
    let mut mins = Vec::with_capacity(points.len());
    for z in points {
        let g1 = metric_at(ctx.source_kernel(), z)?;
        let pb = pullback_matrix(f, ctx.target_kernel(), z)?;
        let m = &g1.matrix * Complex64::new(c, 0.0) - pb;
        mins.push(min_eigenvalue(&m));
    }
    let min = mins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GlobalCheck {
        c,
        points: points.to_vec(),
        passed: min >= -ctx.tol.psd,
        min_eigenvalues: mins,
        min_eigenvalue: min,
    })
}

/// Tolerance on the Suzuki inequality, which holds with equality for the disc at α = ½.
pub const SUZUKI_TOL: f64 = 1e-10;

/// Result of α F(w,ζ) ≤ 1 − ρ(w,ζ)^α over a grid of pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuzukiReport {
    pub alpha: f64,
    pub holds_on_grid: bool,
    /// 1/α, the constant the condition implies for the global bound.
    pub implied_c: f64,
    /// min over pairs of (1 − ρ^α) − α F.
    pub worst_margin: f64,
    pub worst_pair: (CPoint, CPoint),
    /// max F over the grid.
    pub max_grad_norm: f64,
    pub pairs: usize,
    pub tolerance: f64,
}

pub fn suzuki_condition_check(kernel: &KernelHandle, alpha: f64, grid: &GridSpec) -> Result<SuzukiReport> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("α = {alpha} must be positive")));
    }
    let domain = kernel.domain();
    let scale = 1usize << grid.levels.saturating_sub(1);
    let ws = polar_grid(domain, grid.w_radius, grid.radial * scale, grid.angular * scale);
    let zs = polar_grid(domain, grid.zeta_radius, grid.radial * scale, grid.angular * scale);
    let mut worst = (f64::INFINITY, CPoint::origin(0), CPoint::origin(0));
    let mut max_f: f64 = 0.0;
    for w in &ws {
        let at = GradNormAt::new(kernel, w)?;
        for zeta in &zs {
            let f = at.norm(zeta)?;
            let rho = normalized_kernel(kernel, w, zeta)?;
            let margin = (1.0 - rho.powf(alpha)) - alpha * f;
            max_f = max_f.max(f);
            if margin < worst.0 {
                worst = (margin, w.clone(), zeta.clone());
            }
        }
    }
    Ok(SuzukiReport {
        alpha,
        holds_on_grid: worst.0 >= -SUZUKI_TOL,
        implied_c: 1.0 / alpha,
        worst_margin: worst.0,
        worst_pair: (worst.1, worst.2),
        max_grad_norm: max_f,
        pairs: ws.len() * zs.len(),
        tolerance: SUZUKI_TOL,
    })
}

/// The built-in map suite: identity, (z,0), z², Möbius maps, a constant, and (z/2, z/2).
pub fn builtin_map_suite() -> Result<Vec<MapSpec>> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let disc = DomainSpec::disc();
    let bidisc = DomainSpec::polydisc(2)?;
    let ball2 = DomainSpec::ball(2)?;
    let half = Expr::scaled(c(0.5, 0.0), Expr::var(0));
    Ok(vec![
        MapSpec::identity(disc.clone())?,
        MapSpec::new(
            "embed",
            disc.clone(),
            bidisc.clone(),
            vec![Expr::var(0), Expr::constant(c(0.0, 0.0))],
        )?,
        MapSpec::new("square", disc.clone(), disc.clone(), vec![Expr::pow(Expr::var(0), 2)])?,
        {
            let mut m = MapSpec::mobius_product(&[c(0.5, 0.0)])?;
            m.name = "mobius".into();
            m
        },
        {
            let mut m = MapSpec::mobius_product(&[c(0.3, 0.0), c(0.0, -0.2)])?;
            m.name = "mobius2".into();
            m
        },
        MapSpec::constant(disc.clone(), disc.clone(), &[c(0.25, 0.1)])?,
        MapSpec::new("half-diagonal", disc, ball2, vec![half.clone(), half])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::closed_form_kernel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ctx(src: &DomainSpec, tgt: &DomainSpec, order: usize) -> SchwarzContext {
        SchwarzContext::new(
            closed_form_kernel(src).unwrap(),
            closed_form_kernel(tgt).unwrap(),
            RefinedRule::new(src, order).unwrap(),
        )
        .unwrap()
    }

    fn suite(name: &str) -> MapSpec {
        builtin_map_suite().unwrap().into_iter().find(|m| m.name == name).unwrap()
    }

    #[test]
    fn embedding_is_sharp() {
        let f = suite("embed");
        let cx = ctx(f.source(), f.target(), 30);
        let z = CPoint::origin(1);
        assert!((pullback_metric(&f, cx.target_kernel(), &z, &[c(1.0, 0.0)]).unwrap() - 2.0).abs() < 1e-12);
        let r = verify_pointwise(&f, &CPoint::real(&[0.3]), &[c(1.0, 0.0)], &cx).unwrap();
        assert!(r.slack.abs() < 1e-8, "{r:?}");
        assert!(r.cov_identity_residual < 1e-8);
        assert!(r.passed);
    }

    #[test]
    fn square_and_constant() {
        let sq = suite("square");
        let cx = ctx(sq.source(), sq.target(), 30);
        assert!(pullback_metric(&sq, cx.target_kernel(), &CPoint::origin(1), &[c(1.0, 0.0)]).unwrap() < 1e-15);
        let r = verify_pointwise(&sq, &CPoint::real(&[0.4]), &[c(1.0, 0.0)], &cx).unwrap();
        assert!(r.slack >= -1e-8);
        let k = suite("constant");
        let r = verify_pointwise(&k, &CPoint::real(&[0.4]), &[c(1.0, 0.0)], &cx).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.slack.abs() < 1e-15);
        let v = variance_bound(&k, &cx, &CPoint::real(&[0.4]), &[c(1.0, 0.0)]).unwrap();
        assert_eq!(v.c_f.value.re, 0.0);
    }

    #[test]
    fn identity_variance_matches_metric() {
        let f = suite("identity");
        let cx = ctx(f.source(), f.target(), 30);
        let v = variance_bound(&f, &cx, &CPoint::origin(1), &[c(1.0, 0.0)]).unwrap();
        assert!((v.c_f.value.re - 2.0).abs() < 1e-8);
        assert!(v.mean_w.value.norm() < 1e-8);
        assert!(v.converged);
    }

    #[test]
    fn classifier() {
        let pts = [0.1, 0.3, -0.2, 0.5];
        let sample: Vec<(CPoint, Vec<Complex64>)> = pts
            .iter()
            .map(|&r| (CPoint::new(vec![c(r, 0.5 * r)]), vec![c(1.0, 0.0)]))
            .collect();
        let f = suite("embed");
        let cx = ctx(f.source(), f.target(), 4);
        let rep = equality_classifier(&f, &sample, &cx).unwrap();
        assert!(rep.is_lambda_isometry && (rep.lambda - 1.0).abs() < 1e-6);
        assert!(rep.condition_d_residual < 1e-8);
        assert_eq!(rep.classification, "injective");
        let cx = ctx(&DomainSpec::disc(), &DomainSpec::disc(), 4);
        let rep = equality_classifier(&suite("constant"), &sample, &cx).unwrap();
        assert!(rep.is_lambda_isometry && rep.lambda == 0.0 && rep.consistent);
        let mut with_center = sample.clone();
        with_center.push((CPoint::origin(1), vec![c(1.0, 0.0)]));
        let rep = equality_classifier(&suite("square"), &with_center, &cx).unwrap();
        assert!(!rep.is_lambda_isometry);
    }

    #[test]
    fn global_constant_on_disc() {
        let k = closed_form_kernel(&DomainSpec::disc()).unwrap();
        let g = GridSpec {
            w_radius: 0.9,
            zeta_radius: 0.9,
            radial: 3,
            angular: 4,
            levels: 3,
        };
        let gc = global_constant(&k, &g).unwrap();
        assert!(gc.c_grid < 2.0);
        assert!(gc.refinement_trend.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(gc.analytic_sup, Some(2.0));
        let smaller = global_constant(&k, &GridSpec { w_radius: 0.5, zeta_radius: 0.5, ..g }).unwrap();
        assert!(smaller.c_grid < gc.c_grid);
    }

    #[test]
    fn suzuki_on_disc() {
        let k = closed_form_kernel(&DomainSpec::disc()).unwrap();
        let g = GridSpec::default();
        let rep = suzuki_condition_check(&k, 0.5, &g).unwrap();
        assert!(rep.holds_on_grid, "{rep:?}");
        assert!(rep.implied_c >= 2.0);
        assert!(!suzuki_condition_check(&k, 5.0, &g).unwrap().holds_on_grid);
    }

    #[test]
    fn global_psd() {
        let f = suite("half-diagonal");
        let cx = ctx(f.source(), f.target(), 4);
        let pts = polar_grid(f.source(), 0.8, 4, 5);
        assert!(verify_global(&f, 3.0, &pts, &cx).unwrap().passed);
    }
}
