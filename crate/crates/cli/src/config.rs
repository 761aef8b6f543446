//! Scenario definitions from TOML.
//!
//! ```toml
//! [[scenario]]
//! name = "gens_to_feeders"
//! metric = "betweenness"
//! sources = ["generators"]
//! targets = ["d_all"]
//! weighting = "capacity"   # or "unweighted" (default)
//! gfm_kw = 250.0
//! normalize = true
//! report_layer = "T"
//! ```
//!
//! Selector terms are keywords (`generators`, `black_start_generators`,
//! `non_black_start_generators`, `gfm_inverters`, `t_all`, `d_all`) or
//! `name:<vertex>`.

use std::path::Path;

use serde::Deserialize;
use tdnet_core::scenarios::{ScenarioMetric, ScenarioSpec, Selector, Term, Weighting};
use tdnet_core::LayerKind;

use crate::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    scenario: Vec<ScenarioEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    name: String,
    metric: String,
    sources: Vec<String>,
    #[serde(default)]
    exclude_sources: Vec<String>,
    targets: Vec<String>,
    #[serde(default)]
    exclude_targets: Vec<String>,
    weighting: Option<String>,
    gfm_kw: Option<f64>,
    #[serde(default)]
    normalize: bool,
    report_layer: Option<String>,
}

fn terms(list: &[String]) -> CliResult<Vec<Term>> {
    list.iter()
        .map(|s| s.parse::<Term>().map_err(CliError::from))
        .collect()
}

impl ScenarioEntry {
    fn into_spec(self) -> CliResult<ScenarioSpec> {
        let bad = |msg: String| CliError::Config(format!("scenario `{}`: {msg}", self.name));
        let metric = match self.metric.as_str() {
            "closeness" => ScenarioMetric::Closeness,
            "betweenness" => ScenarioMetric::Betweenness,
            m => return Err(bad(format!("unknown metric `{m}`"))),
        };
        let weighting = match self.weighting.as_deref() {
            None | Some("unweighted") => Weighting::Unweighted,
            Some("capacity") => Weighting::ByCapacity { gfm_kw: self.gfm_kw },
            Some(w) => return Err(bad(format!("unknown weighting `{w}`"))),
        };
        if metric == ScenarioMetric::Closeness && weighting != Weighting::Unweighted {
            return Err(bad("closeness cannot be weighted".into()));
        }
        let report_layer = match self.report_layer.as_deref() {
            None => None,
            Some("T") => Some(LayerKind::Transmission),
            Some("D") => Some(LayerKind::Distribution),
            Some(l) => return Err(bad(format!("unknown report layer `{l}`"))),
        };
        Ok(ScenarioSpec {
            metric,
            sources: Selector {
                include: terms(&self.sources)?,
                exclude: terms(&self.exclude_sources)?,
            },
            targets: Selector {
                include: terms(&self.targets)?,
                exclude: terms(&self.exclude_targets)?,
            },
            weighting,
            normalize: self.normalize,
            report_layer,
            name: self.name,
        })
    }
}

pub fn parse_scenarios(text: &str) -> CliResult<Vec<ScenarioSpec>> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    file.scenario.into_iter().map(ScenarioEntry::into_spec).collect()
}

pub fn load_scenarios(path: &Path) -> CliResult<Vec<ScenarioSpec>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_scenarios(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_scenario() {
        let specs = parse_scenarios(
            r#"
            [[scenario]]
            name = "x"
            metric = "betweenness"
            sources = ["black_start_generators", "gfm_inverters"]
            targets = ["generators"]
            exclude_targets = ["name:G2"]
            weighting = "capacity"
            normalize = true
            report_layer = "T"
            "#,
        )
        .unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(specs[0].weighting, Weighting::ByCapacity { gfm_kw: None });
        assert_eq!(specs[0].targets.to_string(), "generators -name:G2");
    }

    #[test]
    fn rejects_bad_entries() {
        let base = "[[scenario]]\nname='x'\nsources=['t_all']\ntargets=['d_all']\n";
        assert!(parse_scenarios(&format!("{base}metric='pagerank'\n")).is_err());
        assert!(parse_scenarios(&format!("{base}metric='closeness'\nweighting='capacity'\n")).is_err());
        assert!(parse_scenarios(&format!("{base}metric='closeness'\ncolour='red'\n")).is_err());
        assert!(parse_scenarios("[[scenario]]\nname='x'\nmetric='closeness'\nsources=['bogus']\ntargets=['d_all']\n").is_err());
    }
}
