//! Run reports: a CSV table of per-record rows plus a JSON document with
//! checks, effective tolerances and the backend stamp.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Backend and discretization that produced a report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_backend: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_basis_size: Option<usize>,
}

/// One pass/fail judgement: `value` compared with `limit` in the stated direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// "<=" or ">=" or "==" (booleans encoded as 0/1).
    pub relation: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            relation: "<=".into(),
            passed: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            relation: ">=".into(),
            passed: value >= limit,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            relation: "==".into(),
            passed: ok,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario_id: String,
    pub task: String,
    pub description: String,
    pub environment: Environment,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// Rows are also emitted as report.csv.
    pub table: Table,
    /// Task-specific structured results.
    pub details: serde_json::Value,
    /// Notes on results that are reported but not judged (trends, approximations).
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.table.columns)?;
        for r in &self.table.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes report.csv and report.json into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv()?)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        Ok(())
    }

    /// One line per check followed by the verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} [{}] {}", self.scenario_id, self.task, self.environment.backend);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  {} {}: {:e} {} {:e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.relation,
                c.limit
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(s, "{}", if self.passed { "all checks passed" } else { "some checks failed" });
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_round_trip() {
        let mut t = Table::new(&["z", "value"]);
        t.push(vec!["(0.1+0i)".into(), "0.30000000000000004".into()]);
        let mut r = Report {
            scenario_id: "x".into(),
            task: "metric".into(),
            description: String::new(),
            environment: Environment {
                backend: "closed".into(),
                ..Default::default()
            },
            tolerances: BTreeMap::from([("slack".to_string(), 1e-8)]),
            checks: vec![Check::at_most("err", 0.1 + 0.2, 1.0)],
            table: t,
            details: serde_json::json!({"a": [1.5, 2]}),
            notes: vec![],
            passed: false,
        };
        r.finish();
        assert!(r.passed);
        assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
        assert_eq!(r.to_csv().unwrap(), "z,value\n(0.1+0i),0.30000000000000004\n");
    }
}
