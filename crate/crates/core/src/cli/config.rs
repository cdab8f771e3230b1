use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use super::scenario::{build_curves, ELLIPSE_SEMI_MINOR};
use crate::flow::{Cadence, EvolveConfig, FlowState, StepConfig, StopConditions};

/// Default semi-major axis of the ellipse scenario (semi-minor axis is 2).
pub const DEFAULT_ELLIPSE_A: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Circle,
    Ellipse,
    SlagCone,
    XCone,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Circle,
        ScenarioKind::Ellipse,
        ScenarioKind::SlagCone,
        ScenarioKind::XCone,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Circle => "circle",
            ScenarioKind::Ellipse => "ellipse",
            ScenarioKind::SlagCone => "slag_cone",
            ScenarioKind::XCone => "x_cone",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Parameter names with their defaults; `None` marks a required parameter.
    pub fn parameters(self) -> &'static [(&'static str, Option<f64>)] {
        match self {
            ScenarioKind::Circle => &[("rho", Some(2.0))],
            ScenarioKind::Ellipse => &[("a", Some(DEFAULT_ELLIPSE_A))],
            ScenarioKind::SlagCone => &[("phi", Some(0.3)), ("truncation", Some(5.0))],
            ScenarioKind::XCone => &[("truncation", Some(5.0))],
            ScenarioKind::Custom => &[("path", None)],
        }
    }

    pub fn is_closed(self) -> bool {
        !matches!(self, ScenarioKind::SlagCone | ScenarioKind::XCone)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: ScenarioKind,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
}

impl Scenario {
    pub fn number(&self, key: &str) -> f64 {
        self.parameters
            .get(key)
            .and_then(Value::as_f64)
            .unwrap_or(f64::NAN)
    }

    pub fn path(&self) -> Option<&str> {
        self.parameters.get("path").and_then(Value::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSettings {
    pub origin_contact_fraction: f64,
    pub curvature_resolution_limit: f64,
    pub max_steps: Option<u64>,
}

impl Default for StopSettings {
    fn default() -> Self {
        let d = StopConditions::default();
        StopSettings {
            origin_contact_fraction: d.origin_contact_fraction,
            curvature_resolution_limit: d.curvature_resolution_limit,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub snapshots: Cadence,
    pub diagnostics: Cadence,
    /// Reference time of the density column; c/2 when absent.
    pub density_reference_time: Option<f64>,
    pub svg: bool,
    /// Directory name under the output root; derived from the scenario and config hash when absent.
    pub run_name: Option<String>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        let d = EvolveConfig::default();
        OutputSettings {
            snapshots: d.snapshots,
            diagnostics: d.diagnostics,
            density_reference_time: None,
            svg: false,
            run_name: None,
        }
    }
}

fn default_resolution() -> usize {
    512
}

/// A run configuration. Unknown keys are rejected at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// End time; defaults to c for closed data with c > 0 (twice the maximal
    /// lifespan c/2), else 1.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub integrator: StepConfig,
    #[serde(default)]
    pub stop: StopSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        RunConfig {
            scenario: Scenario {
                name: scenario,
                parameters: BTreeMap::new(),
            },
            normalize: false,
            resolution: default_resolution(),
            t_end: None,
            integrator: StepConfig::default(),
            stop: StopSettings::default(),
            output: OutputSettings::default(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.scenario.parameters.insert(key.into(), value.into());
        self
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            step: self.integrator.clone(),
            stop: StopConditions {
                t_end: self.t_end.unwrap_or(1.0),
                origin_contact_fraction: self.stop.origin_contact_fraction,
                curvature_resolution_limit: self.stop.curvature_resolution_limit,
                max_steps: self.stop.max_steps,
            },
            snapshots: self.output.snapshots.clone(),
            diagnostics: self.output.diagnostics.clone(),
            density_reference_time: self.output.density_reference_time,
        }
    }

    /// Fills in scenario defaults and validates every field.
    pub fn resolve(mut self, base_dir: &Path) -> Result<Self> {
        let kind = self.scenario.name;
        let known = kind.parameters();
        if let Some(k) = self
            .scenario
            .parameters
            .keys()
            .find(|k| !known.iter().any(|(n, _)| n == k))
        {
            return Err(Error::Configuration(format!(
                "scenario.parameters.{k}: unknown parameter for scenario {}",
                kind.name()
            )));
        }
        for (key, default) in known {
            match (self.scenario.parameters.get(*key), default) {
                (None, Some(d)) => {
                    self.scenario.parameters.insert((*key).into(), Value::from(*d));
                }
                (None, None) => {
                    return Err(Error::Configuration(format!(
                        "scenario.parameters.{key}: required for scenario {}",
                        kind.name()
                    )))
                }
                (Some(v), Some(_)) if !v.as_f64().is_some_and(f64::is_finite) => {
                    return Err(Error::Configuration(format!(
                        "scenario.parameters.{key}: expected a finite number, got {v}"
                    )))
                }
                (Some(v), None) if !v.is_string() => {
                    return Err(Error::Configuration(format!(
                        "scenario.parameters.{key}: expected a string, got {v}"
                    )))
                }
                _ => {}
            }
        }
        let positive = |key: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Configuration(format!("{key}: must be positive, got {v}")))
            }
        };
        match kind {
            ScenarioKind::Circle => positive("scenario.parameters.rho", self.scenario.number("rho"))?,
            ScenarioKind::Ellipse => positive("scenario.parameters.a", self.scenario.number("a"))?,
            ScenarioKind::SlagCone | ScenarioKind::XCone => positive(
                "scenario.parameters.truncation",
                self.scenario.number("truncation"),
            )?,
            ScenarioKind::Custom => {
                let p = PathBuf::from(self.scenario.path().unwrap_or_default());
                let p = if p.is_absolute() { p } else { base_dir.join(p) };
                self.scenario
                    .parameters
                    .insert("path".into(), Value::from(p.to_string_lossy().into_owned()));
            }
        }
        let min_nodes = if kind.is_closed() { 16 } else { 4 };
        if self.resolution < min_nodes && kind != ScenarioKind::Custom {
            return Err(Error::Configuration(format!(
                "resolution: needs at least {min_nodes} nodes, got {}",
                self.resolution
            )));
        }
        if let Some(t) = self.t_end {
            positive("t_end", t)?;
        }
        let i = &self.integrator;
        if !(i.safety > 0.0 && i.safety <= 1.0) {
            return Err(Error::Configuration(format!(
                "integrator.safety: must lie in (0, 1], got {}",
                i.safety
            )));
        }
        positive("integrator.dt_min", i.dt_min)?;
        if let Some(dt) = i.fixed_dt {
            positive("integrator.fixed_dt", dt)?;
        }
        positive("stop.origin_contact_fraction", self.stop.origin_contact_fraction)?;
        positive("stop.curvature_resolution_limit", self.stop.curvature_resolution_limit)?;
        positive("output.snapshots.interval", self.output.snapshots.interval)?;
        positive("output.diagnostics.interval", self.output.diagnostics.interval)?;
        if let Some(name) = &self.output.run_name {
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return Err(Error::Configuration(format!(
                    "output.run_name: must be a plain directory name, got {name:?}"
                )));
            }
        }
        if self.t_end.is_none() {
            let c = match kind {
                ScenarioKind::Circle => 0.5 * self.scenario.number("rho").powi(2),
                ScenarioKind::Ellipse => self.scenario.number("a") * ELLIPSE_SEMI_MINOR / 2.0,
                ScenarioKind::SlagCone | ScenarioKind::XCone => f64::NAN,
                ScenarioKind::Custom => {
                    let curves = build_curves(&self)?;
                    FlowState::new(curves)?.initial_constant.unwrap_or(f64::NAN)
                }
            };
            let c = if self.normalize && c > 0.0 { 1.0 } else { c };
            self.t_end = Some(if c > 0.0 { c } else { 1.0 });
        }
        Ok(self)
    }
}

pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::json(origin, e))
}

/// Reads, resolves and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, path)?.resolve(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, Path::new("test.json")).and_then(|c| c.resolve(Path::new(".")))
    }

    #[test]
    fn defaults_are_materialized() {
        let c = parse(r#"{"scenario": {"name": "ellipse"}}"#).unwrap();
        assert_eq!(c.scenario.number("a"), DEFAULT_ELLIPSE_A);
        assert_eq!(c.resolution, 512);
        assert_eq!(c.t_end, Some(DEFAULT_ELLIPSE_A));
        let n = parse(r#"{"scenario": {"name": "ellipse"}, "normalize": true}"#).unwrap();
        assert_eq!(n.t_end, Some(1.0));
        let x = parse(r#"{"scenario": {"name": "x_cone"}, "t_end": 0.25}"#).unwrap();
        assert_eq!(x.t_end, Some(0.25));
        let echoed = serde_json::to_string(&c).unwrap();
        assert_eq!(parse(&echoed).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let e = parse(r#"{"scenario": {"name": "circle"}, "resolutoin": 64}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("resolutoin") && msg.contains("line 1"), "{msg}");
        let e = parse(r#"{"scenario": {"name": "circle"}, "integrator": {"safty": 0.1}}"#).unwrap_err();
        assert!(e.to_string().contains("safty"));
        let e = parse(r#"{"scenario": {"name": "circle", "parameters": {"r": 1}}}"#).unwrap_err();
        assert!(e.to_string().contains("scenario.parameters.r"));
    }

    #[test]
    fn invalid_values_are_errors() {
        assert!(parse(r#"{"scenario": {"name": "ellipse", "parameters": {"a": -1}}}"#).is_err());
        assert!(parse(r#"{"scenario": {"name": "circle"}, "resolution": 8}"#).is_err());
        assert!(parse(r#"{"scenario": {"name": "circle"}, "integrator": {"safety": 2.0}}"#).is_err());
        assert!(parse(r#"{"scenario": {"name": "custom"}}"#).is_err());
        assert!(parse(r#"{"scenario": {"name": "warp"}}"#).is_err());
        assert!(parse(r#"{"scenario": {"name": "circle"}, "output": {"run_name": "../x"}}"#).is_err());
    }
}
