//! Scenarios shipped with the crate.

use crate::error::{Error, Result};
use crate::scenario::Scenario;

const BUILTIN: &[(&str, &str)] = &[
    ("ball-gradnorm", include_str!("../scenarios/ball-gradnorm.json")),
    ("polydisc-gradnorm", include_str!("../scenarios/polydisc-gradnorm.json")),
    ("schwarz-suite", include_str!("../scenarios/schwarz-suite.json")),
    ("equality-suite", include_str!("../scenarios/equality-suite.json")),
    ("fisher-identity", include_str!("../scenarios/fisher-identity.json")),
    ("rep-map-suite", include_str!("../scenarios/rep-map-suite.json")),
    ("annulus-trend", include_str!("../scenarios/annulus-trend.json")),
    ("suzuki-disc", include_str!("../scenarios/suzuki-disc.json")),
    ("numeric-disc", include_str!("../scenarios/numeric-disc.json")),
    ("ball-metric", include_str!("../scenarios/ball-metric.json")),
];

pub fn list_builtin() -> Vec<&'static str> {
    BUILTIN.iter().map(|(id, _)| *id).collect()
}

/// The scenario file text for a built-in id.
pub fn builtin_source(id: &str) -> Result<&'static str> {
    BUILTIN
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::Scenario(format!("no built-in scenario `{id}`; try `list`")))
}

pub fn builtin(id: &str) -> Result<Scenario> {
    Scenario::from_json_str(builtin_source(id)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_parse_with_matching_ids() {
        let ids = list_builtin();
        assert!(ids.len() >= 8);
        for id in ["ball-gradnorm", "schwarz-suite", "suzuki-disc", "rep-map-suite"] {
            assert!(ids.contains(&id));
        }
        for id in ids {
            assert_eq!(builtin(id).unwrap().id, id);
        }
        assert!(builtin("nope").is_err());
    }
}
