//! Scenario files: what to verify, on which domains, with which backends.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::kernel::{KernelConfig, KernelKind};
use crate::maps::MapJson;
use crate::point::CPoint;
use crate::schwarz::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Kernel,
    Metric,
    Statistics,
    Schwarz,
    Gradnorm,
    Suzuki,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Kernel => "kernel",
            Task::Metric => "metric",
            Task::Statistics => "statistics",
            Task::Schwarz => "schwarz",
            Task::Gradnorm => "gradnorm",
            Task::Suzuki => "suzuki",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_radius() -> f64 {
    0.6
}

/// The global constant: `"analytic"` or a number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Value(f64),
    Keyword(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub task: Task,
    #[serde(default, alias = "source")]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub target: Option<DomainSpec>,
    #[serde(default = "KernelConfig::closed")]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub target_kernel: Option<KernelConfig>,
    /// Kernel the `kernel` task compares against.
    #[serde(default)]
    pub reference_kernel: Option<KernelConfig>,
    /// Quadrature order for moments; the refinement doubles it.
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub map: Option<MapJson>,
    /// Names from the built-in map suite, or `"all"`.
    #[serde(default)]
    pub suite: Vec<String>,
    #[serde(default)]
    pub points: Vec<CPoint>,
    #[serde(default)]
    pub directions: Vec<CPoint>,
    #[serde(default)]
    pub random_points: Option<RandomPoints>,
    #[serde(default)]
    pub targets: Vec<CPoint>,
    #[serde(default)]
    pub boundary_points: Vec<CPoint>,
    /// Möbius parameters for invariance checks.
    #[serde(default)]
    pub mobius: Vec<CPoint>,
    #[serde(default, rename = "C")]
    pub c: Option<ConstantSpec>,
    #[serde(default)]
    pub classify: bool,
    #[serde(default)]
    pub expect_classification: BTreeMap<String, String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Require |rep_z(ξ)|² to increase strictly along `targets`.
    #[serde(default)]
    pub monotone: bool,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

pub const DEFAULT_ORDER: usize = 20;

/// Built-in tolerance defaults; `rep_residual` is looser for the numeric backend.
pub fn default_tolerances(kernel: KernelKind) -> BTreeMap<String, f64> {
    let numeric = kernel == KernelKind::Numeric;
    [
        ("slack", 1e-8),
        ("cov_residual", 1e-8),
        ("isometry_spread", 1e-6),
        ("condition_d", 1e-8),
        ("psd", 1e-8),
        ("convergence", 1e-6),
        ("fisher_rel", 1e-4),
        ("score_mean", 1e-8),
        ("normalization", 1e-8),
        ("kernel_rel", 1e-6),
        ("boundary", 1e-10),
        ("rep_residual", if numeric { 1e-4 } else { 1e-8 }),
        ("invariance", 1e-8),
        ("metric_fd", 1e-6),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
    }

    pub fn source(&self) -> Result<&DomainSpec> {
        self.domain
            .as_ref()
            .ok_or_else(|| Error::Scenario(format!("task `{}` needs field `domain`", self.task.name())))
    }

    pub fn target_kernel_config(&self) -> &KernelConfig {
        self.target_kernel.as_ref().unwrap_or(&self.kernel)
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(DEFAULT_ORDER)
    }

    /// Defaults for the source backend overlaid with the scenario's overrides.
    pub fn effective_tolerances(&self) -> BTreeMap<String, f64> {
        let mut t = default_tolerances(self.kernel.kernel);
        t.extend(self.tolerances.iter().map(|(k, v)| (k.clone(), *v)));
        t
    }

    /// Structural checks: required fields per task and consistent dimensions.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Scenario(format!("scenario `{}`: {m}", self.id)));
        if self.id.is_empty() {
            return err("field `id` must not be empty".into());
        }
        let known = default_tolerances(KernelKind::Closed);
        for (k, v) in &self.tolerances {
            if !known.contains_key(k) {
                return err(format!("unknown tolerance `{k}`"));
            }
            if !(*v >= 0.0) {
                return err(format!("tolerance `{k}` must be non-negative"));
            }
        }
        if self.order == Some(0) {
            return err("field `order` must be positive".into());
        }
        let uses_suite = self.task == Task::Schwarz && !self.suite.is_empty();
        if !uses_suite {
            self.source()?;
        }
        if let Some(dom) = &self.domain {
            let n = dom.dim();
            let lists = [
                ("points", &self.points),
                ("directions", &self.directions),
                ("targets", &self.targets),
                ("boundary_points", &self.boundary_points),
            ];
            for (name, list) in lists {
                if let Some((i, p)) = list.iter().enumerate().find(|(_, p)| p.dim() != n) {
                    return err(format!("{name}[{i}] has dimension {}, domain has {n}", p.dim()));
                }
            }
            if let Some((i, p)) = self.mobius.iter().enumerate().find(|(_, p)| p.dim() != n) {
                return err(format!("mobius[{i}] has dimension {}, domain has {n}", p.dim()));
            }
            if !uses_suite {
                for (name, list) in [("points", &self.points), ("targets", &self.targets)] {
                    if let Some((i, p)) = list.iter().enumerate().find(|(_, p)| !dom.contains_unchecked(p)) {
                        return err(format!("{name}[{i}] = {p} is not inside {dom}"));
                    }
                }
            }
        }
        let nd = self.directions.len();
        if nd > 1 && nd != self.points.len() {
            return err(format!(
                "`directions` must have length 0, 1 or {} (one per point), found {nd}",
                self.points.len()
            ));
        }
        if let Some(ConstantSpec::Keyword(k)) = &self.c {
            if k != "analytic" {
                return err(format!("field `C` must be a number or \"analytic\", found \"{k}\""));
            }
        }
        let has_points = !self.points.is_empty() || self.random_points.is_some();
        match self.task {
            Task::Schwarz => {
                if self.map.is_none() && self.suite.is_empty() {
                    return err("task `schwarz` needs `map` or `suite`".into());
                }
                if self.map.is_some() && self.target.is_none() {
                    return err("task `schwarz` with `map` needs `target`".into());
                }
                if !has_points {
                    return err("task `schwarz` needs `points` or `random_points`".into());
                }
            }
            Task::Suzuki => {
                if self.alpha.is_none() {
                    return err("task `suzuki` needs `alpha`".into());
                }
            }
            Task::Kernel | Task::Metric | Task::Statistics => {
                if !has_points {
                    return err(format!("task `{}` needs `points` or `random_points`", self.task.name()));
                }
            }
            Task::Gradnorm => {
                if !has_points {
                    return err("task `gradnorm` needs `points` or `random_points`".into());
                }
                if self.targets.is_empty() && self.boundary_points.is_empty() && self.random_points.is_none() {
                    return err("task `gradnorm` needs `targets`, `boundary_points` or `random_points`".into());
                }
            }
        }
        Ok(())
    }
}
