//! Running a scenario from JSON in-process and reading back its report.

use bergman_lab::runner::{run_scenario, RunOptions};
use bergman_lab::scenario::Scenario;

const SCENARIO: &str = r#"{
  "id": "bidisc-embedding",
  "task": "schwarz",
  "source": {"kind": "disc"},
  "target": {"kind": "polydisc", "dim": 2},
  "map": {"name": "graph", "components": [{"var": 0}, {"mobius": {"a": [0.2, 0.1], "arg": {"var": 0}}}]},
  "order": 16,
  "random_points": {"count": 5, "radius": 0.7, "seed": 3},
  "C": "analytic",
  "classify": true
}"#;

fn main() -> bergman_lab::error::Result<()> {
    let s = Scenario::from_json_str(SCENARIO)?;
    let report = run_scenario(&s, RunOptions::default())?;
    print!("{}", report.summary());
    print!("{}", report.to_csv()?);
    Ok(())
}
