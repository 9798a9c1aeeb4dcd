//! JSON configuration: loading, defaults and `--set key=value` overrides.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use tierplace_core::metrics::AvailabilitySpec;
use tierplace_core::model::{TierBudgets, Topology};
use tierplace_core::risk::RiskParams;
use tierplace_core::sim::ScenarioSpec;
use tierplace_core::solvers::{DualOptions, OracleOptions, RepairOrder, StepSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSpec,
    /// Explicit instance for `verify`; generated from `scenario` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<Topology>,
    pub risk: RiskParams,
    pub availability: AvailabilitySpec,
    pub dual: DualConfig,
    pub oracle_max_streams: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scenario: ScenarioSpec::default(),
            instance: None,
            risk: RiskParams::default(),
            availability: AvailabilitySpec::new(8670.0, 1.0, 3),
            dual: DualConfig::default(),
            oracle_max_streams: OracleOptions::default().max_streams,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualConfig {
    /// `[edge, fog, cloud]` stream-count budgets; derived from capacity when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<[usize; 3]>,
    pub schedule: StepSchedule,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    pub repair: RepairOrder,
}

impl DualConfig {
    pub fn options(&self) -> DualOptions {
        DualOptions {
            budgets: self.budgets.map(TierBudgets),
            schedule: self.schedule,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            repair: self.repair,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("config does not match the schema")
    }

    /// Load `path` (defaults when `None`) and apply dotted-path overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let base = match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
                Self::from_json(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => Config::default(),
        };
        if overrides.is_empty() {
            return Ok(base);
        }
        let mut tree = serde_json::to_value(&base)?;
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        serde_json::from_value(tree).context("overrides do not match the schema")
    }
}

/// Set `a.b.c=value` in a JSON tree. The value is parsed as JSON when it
/// parses, otherwise taken as a string.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<()> {
    let Some((path, raw)) = assignment.split_once('=') else {
        bail!("override {assignment:?} is not key=value");
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override key {path:?} has an empty segment");
    }
    let mut node = tree;
    for k in &keys[..keys.len() - 1] {
        node = match node {
            Value::Object(m) => m.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default())),
            Value::Array(a) => {
                let i: usize = k.parse().with_context(|| format!("override {path:?}: {k:?} is not an index"))?;
                a.get_mut(i).with_context(|| format!("override {path:?}: index {i} out of range"))?
            }
            _ => bail!("override {path:?}: {k:?} is not an object"),
        };
    }
    let last = keys[keys.len() - 1];
    match node {
        Value::Object(m) => {
            m.insert(last.to_string(), value);
        }
        Value::Array(a) => {
            let i: usize = last.parse().with_context(|| format!("override {path:?}: {last:?} is not an index"))?;
            *a.get_mut(i).with_context(|| format!("override {path:?}: index {i} out of range"))? = value;
        }
        _ => bail!("override {path:?}: parent is not an object"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_all_defaults() {
        assert_eq!(Config::from_json("{}").unwrap(), Config::default());
    }

    #[test]
    fn documented_defaults_match() {
        let doc = include_str!("../../../docs/default-config.json");
        assert_eq!(Config::from_json(doc).unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_json(r#"{"scenaro": {}}"#).is_err());
        assert!(Config::from_json(r#"{"scenario": {"n_task": 3}}"#).is_err());
    }

    #[test]
    fn overrides_apply() {
        let c = Config::load(None, &["scenario.n_tasks=7".into(), "scenario.strategy=cloud_only".into(), "scenario.beta_range.1=1.5".into()]).unwrap();
        assert_eq!(c.scenario.n_tasks, 7);
        assert_eq!(c.scenario.strategy, tierplace_core::sim::Strategy::CloudOnly);
        assert_eq!(c.scenario.beta_range, [0.67, 1.5]);
        assert!(Config::load(None, &["scenario.bogus=1".into()]).is_err());
        let c = Config::load(None, &[r#"dual.schedule={"diminishing":{"scale":null}}"#.into()]).unwrap();
        assert_eq!(c.dual.schedule, StepSchedule::Diminishing { scale: None });
        assert!(Config::load(None, &["noequals".into()]).is_err());
    }
}
