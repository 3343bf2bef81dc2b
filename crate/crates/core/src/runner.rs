//! Executes a [`Scenario`] and assembles its [`Report`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::gradient::{boundary_constancy_scan, invariance_check, GradNormAt, Representative};
use crate::kernel::{KernelConfig, KernelHandle, KernelKind};
use crate::maps::MapSpec;
use crate::metric::{finite_difference_check, metric_at};
use crate::point::{fmt_complex, fmt_coords, fmt_real, CPoint, TangentVector};
use crate::quadrature::RefinedRule;
use crate::report::{Check, Environment, Report, Table};
use crate::sample::{random_directions, random_points};
use crate::scenario::{ConstantSpec, Scenario, Task};
use crate::schwarz::{
    analytic_sup, builtin_map_suite, equality_classifier, global_constant, suzuki_condition_check,
    verify_global, verify_pointwise, GridSpec, SchwarzContext, SchwarzTolerances,
};
use crate::stats::{fisher_pullback, normalization, score_mean, BerezinDensity};

/// Command-line overrides applied on top of a scenario.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub order: Option<usize>,
    pub degree: Option<usize>,
    /// Count unconverged moments and approximate boundary scans as failures.
    pub strict: bool,
}

fn num(x: f64) -> String {
    fmt_real(x)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn with_degree(cfg: &KernelConfig, degree: Option<usize>) -> KernelConfig {
    let mut c = cfg.clone();
    if c.kernel == KernelKind::Numeric && degree.is_some() {
        c.degree = degree;
    }
    c
}

struct Run<'a> {
    s: &'a Scenario,
    opts: RunOptions,
    tol: BTreeMap<String, f64>,
    report: Report,
}

impl<'a> Run<'a> {
    fn new(s: &'a Scenario, opts: RunOptions) -> Self {
        let tol = s.effective_tolerances();
        let report = Report {
            scenario_id: s.id.clone(),
            task: s.task.name().to_string(),
            description: s.description.clone(),
            environment: Environment::default(),
            tolerances: tol.clone(),
            checks: Vec::new(),
            table: Table::default(),
            details: serde_json::Value::Null,
            notes: Vec::new(),
            passed: false,
        };
        Self { s, opts, tol, report }
    }

    fn tol(&self, key: &str) -> f64 {
        self.tol[key]
    }

    fn order(&self) -> usize {
        self.opts.order.unwrap_or_else(|| self.s.order())
    }

    fn kernel(&self, cfg: &KernelConfig, domain: &DomainSpec) -> Result<KernelHandle> {
        with_degree(cfg, self.opts.degree).build(domain)
    }

    fn stamp(&mut self, k: &KernelHandle, target: Option<&KernelHandle>, order: Option<usize>) {
        let cfg = with_degree(&self.s.kernel, self.opts.degree);
        self.report.environment = Environment {
            backend: k.backend_name().to_string(),
            target_backend: target.map(|t| t.backend_name().to_string()),
            degree: (cfg.kernel == KernelKind::Numeric)
                .then(|| cfg.degree.unwrap_or(KernelConfig::DEFAULT_DEGREE)),
            order,
            effective_basis_size: k.effective_basis_size(),
        };
    }

    /// Explicit points followed by seeded random ones, each with a direction.
    fn sample(&self, domain: &DomainSpec, seed_offset: u64) -> Result<Vec<(CPoint, Vec<Complex64>)>> {
        let n = domain.dim();
        let mut out = Vec::new();
        if !self.s.points.is_empty() && self.s.points[0].dim() == n {
            for (i, p) in self.s.points.iter().enumerate() {
                let x = match self.s.directions.len() {
                    0 => {
                        let mut e = vec![Complex64::new(0.0, 0.0); n];
                        e[0] = Complex64::new(1.0, 0.0);
                        e
                    }
                    1 => self.s.directions[0].to_vec(),
                    _ => self.s.directions[i].to_vec(),
                };
                out.push((p.clone(), x));
            }
        }
        if let Some(rp) = self.s.random_points {
            let seed = rp.seed.wrapping_add(seed_offset);
            let pts = random_points(domain, rp.count, rp.radius, seed)?;
            let dirs = random_directions(n, rp.count, seed.wrapping_add(1));
            out.extend(pts.into_iter().zip(dirs));
        }
        if out.is_empty() {
            return Err(Error::Scenario(format!("scenario `{}`: no points of dimension {n}", self.s.id)));
        }
        Ok(out)
    }

    fn strict_check(&mut self, name: &str, ok: bool, note: String) {
        if !ok {
            self.report.notes.push(note);
            if self.opts.strict {
                self.report.checks.push(Check::holds(name, false));
            }
        }
    }

    fn kernel_task(&mut self) -> Result<()> {
        let dom = self.s.source()?.clone();
        let k = self.kernel(&self.s.kernel, &dom)?;
        let reference = self.s.reference_kernel.clone().unwrap_or_else(KernelConfig::closed);
        let r = self.kernel(&reference, &dom)?;
        self.stamp(&k, Some(&r), None);
        let pts: Vec<CPoint> = self.sample(&dom, 0)?.into_iter().map(|(p, _)| p).collect();
        let targets = if self.s.targets.is_empty() { pts.clone() } else { self.s.targets.clone() };
        let mut t = Table::new(&["z", "xi", "value", "reference", "abs_error", "rel_error"]);
        let mut worst: f64 = 0.0;
        for z in &pts {
            for xi in &targets {
                let v = k.value(z, xi)?;
                let rv = r.value(z, xi)?;
                let abs = (v - rv).norm();
                let rel = abs / rv.norm();
                worst = worst.max(rel);
                t.push(vec![
                    z.to_string(),
                    xi.to_string(),
                    fmt_complex(v),
                    fmt_complex(rv),
                    num(abs),
                    num(rel),
                ]);
            }
        }
        self.report.checks.push(Check::at_most("max relative kernel error", worst, self.tol("kernel_rel")));
        self.report.details = json!({ "reference_backend": r.backend_name(), "pairs": t.rows.len() });
        self.report.table = t;
        Ok(())
    }

    fn metric_task(&mut self) -> Result<()> {
        let dom = self.s.source()?.clone();
        let k = self.kernel(&self.s.kernel, &dom)?;
        self.stamp(&k, None, None);
        let h = self.s.fd_step.unwrap_or(1e-4);
        let mut t = Table::new(&["z", "min_eigenvalue", "max_eigenvalue", "fd_error"]);
        let mut worst_fd: f64 = 0.0;
        let mut min_eig = f64::MAX;
        for (z, _) in self.sample(&dom, 0)? {
            let g = metric_at(&k, &z)?;
            let fd = finite_difference_check(&k, &z, h)?;
            worst_fd = worst_fd.max(fd);
            min_eig = min_eig.min(g.min_eigenvalue());
            t.push(vec![
                z.to_string(),
                num(g.min_eigenvalue()),
                num(*g.eigenvalues.last().expect("nonempty spectrum")),
                num(fd),
            ]);
        }
        self.report.checks.push(Check::holds("metric positive definite", min_eig > 0.0));
        self.report.checks.push(Check::at_most("max finite-difference error", worst_fd, self.tol("metric_fd")));
        self.report.details = json!({ "fd_step": h });
        self.report.table = t;
        Ok(())
    }

    fn statistics_task(&mut self) -> Result<()> {
        let dom = self.s.source()?.clone();
        let k = self.kernel(&self.s.kernel, &dom)?;
        let order = self.order();
        self.stamp(&k, None, Some(order));
        let rule = RefinedRule::new(&dom, order)?;
        let p = BerezinDensity::new(k.clone());
        let mut t = Table::new(&[
            "z",
            "X",
            "normalization",
            "score_mean",
            "fisher",
            "metric",
            "rel_error",
            "quad_error_estimate",
        ]);
        let (mut wn, mut wm, mut wf) = (0.0f64, 0.0f64, 0.0f64);
        let mut unconverged = 0;
        for (z, x) in self.sample(&dom, 0)? {
            let tv = TangentVector::new(z.clone(), x.clone())?;
            let nrm = normalization(&p, &rule, &z)?;
            let mean = score_mean(&p, &rule, &z, &tv)?;
            let fisher = fisher_pullback(&p, &rule, &z, &tv)?;
            let g = metric_at(&k, &z)?.norm_sqr(&x)?;
            let rel = (fisher.re() - g).abs() / g;
            let quad = fisher.quad_error_estimate.max(mean.quad_error_estimate);
            if fisher.quad_error_estimate > self.tol("convergence") * g.max(1.0) {
                unconverged += 1;
            }
            wn = wn.max((nrm.value - 1.0).norm());
            wm = wm.max(mean.value.norm());
            wf = wf.max(rel);
            t.push(vec![
                z.to_string(),
                fmt_coords(&x),
                num(nrm.re()),
                num(mean.value.norm()),
                num(fisher.re()),
                num(g),
                num(rel),
                num(quad),
            ]);
        }
        self.report.checks.push(Check::at_most("max |normalization − 1|", wn, self.tol("normalization")));
        self.report.checks.push(Check::at_most("max |score mean|", wm, self.tol("score_mean")));
        self.report.checks.push(Check::at_most("max Fisher relative error", wf, self.tol("fisher_rel")));
        self.strict_check(
            "variances converged",
            unconverged == 0,
            format!("{unconverged} Fisher variances moved beyond tolerance under refinement"),
        );
        self.report.table = t;
        Ok(())
    }

    fn maps(&self) -> Result<Vec<MapSpec>> {
        let mut out = Vec::new();
        if let Some(m) = &self.s.map {
            let src = self.s.source()?.clone();
            let tgt = self.s.target.clone().expect("validated");
            out.push(MapSpec::from_json(m, src, tgt)?);
        }
        if !self.s.suite.is_empty() {
            let all = builtin_map_suite()?;
            for name in &self.s.suite {
                if name == "all" {
                    out.extend(all.iter().cloned());
                } else {
                    let m = all.iter().find(|m| &m.name == name).ok_or_else(|| {
                        let known: Vec<&str> = all.iter().map(|m| m.name.as_str()).collect();
                        Error::Scenario(format!("unknown suite map `{name}`; known: {}", known.join(", ")))
                    })?;
                    out.push(m.clone());
                }
            }
        }
        Ok(out)
    }

    fn schwarz_tolerances(&self) -> SchwarzTolerances {
        SchwarzTolerances {
            slack: self.tol("slack"),
            cov_residual: self.tol("cov_residual"),
            isometry_spread: self.tol("isometry_spread"),
            condition_d: self.tol("condition_d"),
            psd: self.tol("psd"),
            convergence: self.tol("convergence"),
        }
    }

    fn schwarz_task(&mut self) -> Result<()> {
        let order = self.order();
        let maps = self.maps()?;
        let mut t = Table::new(&[
            "scenario_id",
            "z",
            "X",
            "pullback",
            "base_metric",
            "c_f",
            "lhs",
            "rhs",
            "slack",
            "cov_residual",
            "lambda_estimate",
            "quad_error_estimate",
        ]);
        let mut details = serde_json::Map::new();
        let mut stamped = false;
        for (mi, f) in maps.iter().enumerate() {
            let k1 = self.kernel(&self.s.kernel, f.source())?;
            let k2 = self.kernel(self.s.target_kernel_config(), f.target())?;
            if !stamped {
                self.stamp(&k1, Some(&k2), Some(order));
                stamped = true;
            }
            let ctx = SchwarzContext::new(k1, k2, RefinedRule::new(f.source(), order)?)?
                .with_tolerances(self.schwarz_tolerances());
            ctx.check_map(f)?;
            let sample = self.sample(f.source(), 100 * mi as u64)?;
            let name = &f.name;
            let mut recs = Vec::with_capacity(sample.len());
            for (z, x) in &sample {
                let r = verify_pointwise(f, z, x, &ctx)?;
                t.push(vec![
                    format!("{}:{}", self.s.id, name),
                    z.to_string(),
                    fmt_coords(x),
                    num(r.pullback),
                    num(r.base_metric),
                    num(r.c_f),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.slack),
                    num(r.cov_identity_residual),
                    num(r.lambda_estimate),
                    num(r.quad_error_estimate),
                ]);
                recs.push(r);
            }
            let min_slack = recs.iter().map(|r| r.slack).fold(f64::MAX, f64::min);
            self.report.checks.push(Check::at_least(format!("{name}: min slack"), min_slack, -ctx.tol.slack));
            let max_cov = max_of(recs.iter().filter(|r| r.converged).map(|r| r.cov_identity_residual));
            let cov_ok = recs.iter().all(|r| r.cov_identity_ok);
            self.report.checks.push(Check {
                name: format!("{name}: covariance identity"),
                value: max_cov,
                limit: ctx.tol.cov_residual,
                relation: "<= max(limit, 10·quad)".into(),
                passed: cov_ok,
            });
            let unconverged = recs.iter().filter(|r| !r.converged).count();
            self.strict_check(
                &format!("{name}: variances converged"),
                unconverged == 0,
                format!("{name}: {unconverged} variances moved beyond tolerance under refinement"),
            );
            let mut entry = serde_json::Map::new();
            entry.insert("map".into(), json!(f.to_string()));
            if let Some(cspec) = &self.s.c {
                let c = match cspec {
                    ConstantSpec::Value(v) => *v,
                    ConstantSpec::Keyword(_) => analytic_sup(f.target()).ok_or_else(|| {
                        Error::Scenario(format!("no analytic constant is known for {}", f.target()))
                    })?,
                };
                let pts: Vec<CPoint> = sample.iter().map(|(z, _)| z.clone()).collect();
                let g = verify_global(f, c, &pts, &ctx)?;
                self.report.checks.push(Check::at_least(
                    format!("{name}: min eigenvalue of C·g₁ − f*g₂ (C = {c})"),
                    g.min_eigenvalue,
                    -ctx.tol.psd,
                ));
                entry.insert("global".into(), serde_json::to_value(&g)?);
            }
            if self.s.classify {
                let rep = equality_classifier(f, &sample, &ctx)?;
                self.report.checks.push(Check::holds(format!("{name}: classification consistent"), rep.consistent));
                if rep.is_lambda_isometry {
                    self.report.checks.push(Check::at_most(
                        format!("{name}: condition (d) residual"),
                        rep.condition_d_residual,
                        ctx.tol.condition_d,
                    ));
                }
                if let Some(want) = self.s.expect_classification.get(name) {
                    self.report.checks.push(Check::holds(
                        format!("{name}: classified as {want} (got {})", rep.classification),
                        &rep.classification == want,
                    ));
                }
                entry.insert("classification".into(), serde_json::to_value(&rep)?);
            }
            details.insert(name.clone(), serde_json::Value::Object(entry));
        }
        self.report.details = serde_json::Value::Object(details);
        self.report.table = t;
        Ok(())
    }

    fn gradnorm_task(&mut self) -> Result<()> {
        let dom = self.s.source()?.clone();
        let k = self.kernel(&self.s.kernel, &dom)?;
        self.stamp(&k, None, None);
        let pts: Vec<CPoint> = self.sample(&dom, 0)?.into_iter().map(|(p, _)| p).collect();
        let mut targets = self.s.targets.clone();
        // Random targets only when no explicit targets or boundary points are given.
        if let (Some(rp), true) = (self.s.random_points, targets.is_empty() && self.s.boundary_points.is_empty()) {
            targets.extend(random_points(&dom, rp.count, rp.radius, rp.seed.wrapping_add(2))?);
        }
        let mut t = Table::new(&["domain", "z", "xi", "grad_norm", "rep_norm", "residual", "expected", "deviation"]);
        let dname = dom.to_string();
        let sup = analytic_sup(&dom);
        let mut worst_res: f64 = 0.0;
        let mut below_sup = true;
        let mut monotone = true;
        for z in &pts {
            let at = GradNormAt::new(&k, z)?;
            let rep = Representative::new(&k, z)?;
            let mut prev = f64::MIN;
            for xi in &targets {
                let f = at.norm(xi)?;
                let b = rep.image(xi)?.norm_sqr();
                let res = (f - b).abs();
                worst_res = worst_res.max(res);
                if let Some(s) = sup {
                    below_sup &= f < s;
                }
                monotone &= b > prev;
                prev = b;
                t.push(vec![dname.clone(), z.to_string(), xi.to_string(), num(f), num(b), num(res), String::new(), String::new()]);
            }
        }
        if !targets.is_empty() {
            self.report.checks.push(Check::at_most("max |F − |rep|²|", worst_res, self.tol("rep_residual")));
            if sup.is_some() {
                self.report.checks.push(Check::holds("F below the analytic sup at interior pairs", below_sup));
            }
            if self.s.monotone {
                self.report.checks.push(Check::holds("|rep|² increasing along targets", monotone));
            }
        }
        let mut scans = Vec::new();
        for xi0 in &self.s.boundary_points {
            let scan = boundary_constancy_scan(&k, xi0, &pts)?;
            let mut worst = 0.0f64;
            for (z, &f) in pts.iter().zip(&scan.values) {
                let b = Representative::new(&k, z)?.image(&scan.xi_used)?.norm_sqr();
                let res = (f - b).abs();
                worst = worst.max(res);
                t.push(vec![
                    dname.clone(),
                    z.to_string(),
                    scan.xi_used.to_string(),
                    num(f),
                    num(b),
                    num(res),
                    num(scan.expected),
                    num((f - scan.expected).abs()),
                ]);
            }
            if scan.approximate {
                self.strict_check(
                    "boundary scan exact",
                    false,
                    format!("ξ₀ = {xi0} evaluated at {}; max deviation {:e} is a trend", scan.xi_used, scan.max_deviation),
                );
            } else {
                self.report.checks.push(Check::at_most(
                    format!("boundary ξ₀ = {xi0}: max |F − {}|", scan.expected),
                    scan.max_deviation,
                    self.tol("boundary"),
                ));
                self.report.checks.push(Check::at_most(
                    format!("boundary ξ₀ = {xi0}: max |F − |rep|²|"),
                    worst,
                    self.tol("rep_residual"),
                ));
            }
            scans.push(scan);
        }
        let mut invariance = Vec::new();
        for a in &self.s.mobius {
            let phi = MapSpec::mobius_product(a)?;
            let mut worst = 0.0f64;
            for z in &pts {
                for xi in &targets {
                    worst = worst.max(invariance_check(&phi, &k, &k, z, xi)?);
                }
            }
            self.report.checks.push(Check::at_most(format!("Möbius a = {a}: invariance residual"), worst, self.tol("invariance")));
            invariance.push(json!({ "a": a, "residual": worst }));
        }
        self.report.details = json!({ "boundary_scans": scans, "invariance": invariance });
        self.report.table = t;
        Ok(())
    }

    fn suzuki_task(&mut self) -> Result<()> {
        let dom = self.s.source()?.clone();
        let k = self.kernel(&self.s.kernel, &dom)?;
        self.stamp(&k, None, None);
        let grid = self.s.grid.unwrap_or_default();
        let alpha = self.s.alpha.expect("validated");
        let rep = suzuki_condition_check(&k, alpha, &grid)?;
        let gc = global_constant(&k, &grid)?;
        let mut t = Table::new(&["domain", "alpha", "holds_on_grid", "implied_c", "worst_margin", "max_grad_norm", "c_grid", "pairs"]);
        t.push(vec![
            dom.to_string(),
            num(alpha),
            rep.holds_on_grid.to_string(),
            num(rep.implied_c),
            num(rep.worst_margin),
            num(rep.max_grad_norm),
            num(gc.c_grid),
            rep.pairs.to_string(),
        ]);
        self.report.checks.push(Check::holds("condition holds on grid", rep.holds_on_grid));
        if let Some(s) = gc.analytic_sup {
            self.report.checks.push(Check::at_least("implied C vs analytic sup", rep.implied_c, s));
        }
        self.report.checks.push(Check::at_least("implied C vs grid sup", rep.implied_c, gc.c_grid));
        self.report.details = json!({ "suzuki": rep, "global_constant": gc, "grid": grid_json(&grid) });
        self.report.table = t;
        Ok(())
    }
}

fn grid_json(g: &GridSpec) -> serde_json::Value {
    serde_json::to_value(g).unwrap_or(serde_json::Value::Null)
}

/// Runs one scenario. Errors are input or configuration problems; failed checks
/// are reported through [`Report::passed`].
pub fn run_scenario(s: &Scenario, opts: RunOptions) -> Result<Report> {
    s.validate()?;
    let mut run = Run::new(s, opts);
    match s.task {
        Task::Kernel => run.kernel_task()?,
        Task::Metric => run.metric_task()?,
        Task::Statistics => run.statistics_task()?,
        Task::Schwarz => run.schwarz_task()?,
        Task::Gradnorm => run.gradnorm_task()?,
        Task::Suzuki => run.suzuki_task()?,
    }
    run.report.finish();
    Ok(run.report)
}
