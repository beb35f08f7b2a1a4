//! Run configuration: a JSON document, optionally patched by `key=value`
//! overrides, deserialized with field paths in every error.

use std::path::{Path, PathBuf};

use bassopt_core::solver::FrozenInterp;
use bassopt_core::{Economics, Horizon, Method, ResponseForm, ResponseModel, SolverConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::montecarlo::SimConfig;
use crate::netfile::NetworkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Complete,
    InfiniteComplete,
    Line,
    General,
    HeteroUniform,
    HeteroTargeted,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Complete => "complete",
            ModelKind::InfiniteComplete => "infinite-complete",
            ModelKind::Line => "line",
            ModelKind::General => "general",
            ModelKind::HeteroUniform => "hetero-uniform",
            ModelKind::HeteroTargeted => "hetero-targeted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormCfg {
    #[default]
    Sqrt,
    Log,
}

impl From<FormCfg> for ResponseForm {
    fn from(f: FormCfg) -> Self {
        match f {
            FormCfg::Sqrt => ResponseForm::Sqrt,
            FormCfg::Log => ResponseForm::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseCfg {
    #[serde(default)]
    pub form: FormCfg,
    pub p0: f64,
    pub bp: f64,
    pub q0: f64,
    pub bq: f64,
}

impl ResponseCfg {
    pub fn build(&self, at: &str) -> Result<ResponseModel> {
        ResponseModel::new(self.form.into(), self.p0, self.bp, self.q0, self.bq).map_err(|e| prefixed(at, e))
    }
}

/// `"infinite"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "HorizonRaw", into = "HorizonRaw")]
pub enum HorizonCfg {
    #[default]
    Infinite,
    Finite(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HorizonRaw {
    Number(f64),
    Text(String),
}

impl TryFrom<HorizonRaw> for HorizonCfg {
    type Error = String;
    fn try_from(raw: HorizonRaw) -> std::result::Result<Self, String> {
        match raw {
            HorizonRaw::Number(t) if t.is_infinite() && t > 0.0 => Ok(HorizonCfg::Infinite),
            HorizonRaw::Number(t) => Ok(HorizonCfg::Finite(t)),
            HorizonRaw::Text(s) if s == "infinite" || s == "inf" => Ok(HorizonCfg::Infinite),
            HorizonRaw::Text(s) => Err(format!("expected a number or \"infinite\", got {s:?}")),
        }
    }
}

impl From<HorizonCfg> for HorizonRaw {
    fn from(h: HorizonCfg) -> Self {
        match h {
            HorizonCfg::Infinite => HorizonRaw::Text("infinite".into()),
            HorizonCfg::Finite(t) => HorizonRaw::Number(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicsCfg {
    pub gamma: f64,
    pub theta: f64,
    #[serde(default)]
    pub horizon: HorizonCfg,
}

impl EconomicsCfg {
    pub fn build(&self) -> Result<Economics> {
        let horizon = match self.horizon {
            HorizonCfg::Infinite => Horizon::Infinite,
            HorizonCfg::Finite(t) => Horizon::Finite(t),
        };
        Economics::new(self.gamma, self.theta, horizon).map_err(|e| prefixed("economics", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodCfg {
    Sweep,
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpCfg {
    Hermite,
    Linear,
}

/// Mirror of the core solver settings; omitted fields take core defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverCfg {
    pub method: MethodCfg,
    pub dt: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub damping: f64,
    pub adaptive_damping: bool,
    pub tail_tol: f64,
    pub root_tol: Option<f64>,
    pub tail_extension: f64,
    pub max_horizon: f64,
    pub interp: InterpCfg,
    pub shoot_guess: Option<Vec<f64>>,
    pub shoot_max_iters: usize,
}

impl Default for SolverCfg {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverCfg {
            method: match d.method {
                Method::Sweep => MethodCfg::Sweep,
                Method::Shooting => MethodCfg::Shooting,
            },
            dt: d.dt,
            tol: d.tol,
            max_iters: d.max_iters,
            damping: d.damping,
            adaptive_damping: d.adaptive_damping,
            tail_tol: d.tail_tol,
            root_tol: d.root_tol,
            tail_extension: d.tail_extension,
            max_horizon: d.max_horizon,
            interp: match d.interp {
                FrozenInterp::Hermite => InterpCfg::Hermite,
                FrozenInterp::Linear => InterpCfg::Linear,
            },
            shoot_guess: d.shoot_guess,
            shoot_max_iters: d.shoot_max_iters,
        }
    }
}

impl SolverCfg {
    pub fn build(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            method: match self.method {
                MethodCfg::Sweep => Method::Sweep,
                MethodCfg::Shooting => Method::Shooting,
            },
            dt: self.dt,
            tol: self.tol,
            max_iters: self.max_iters,
            damping: self.damping,
            adaptive_damping: self.adaptive_damping,
            tail_tol: self.tail_tol,
            root_tol: self.root_tol,
            tail_extension: self.tail_extension,
            max_horizon: self.max_horizon,
            interp: match self.interp {
                InterpCfg::Hermite => FrozenInterp::Hermite,
                InterpCfg::Linear => FrozenInterp::Linear,
            },
            shoot_guess: self.shoot_guess.clone(),
            shoot_max_iters: self.shoot_max_iters,
        };
        cfg.validate().map_err(|e| prefixed("solver", e))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    /// Solve the model and simulate its optimal promotion.
    #[default]
    Optimal,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimCfg {
    pub n_runs: usize,
    pub seed: u64,
    /// Cell length of the piecewise-constant simulation policy; defaults to
    /// `solver.dt`.
    pub dt: Option<f64>,
    /// Simulated time span; defaults to the solution grid (or the finite
    /// horizon, or 200, for the zero policy).
    pub t_end: Option<f64>,
    /// Ring size standing in for the infinite line.
    pub ring_length: usize,
    pub policy: PolicyChoice,
}

impl Default for SimCfg {
    fn default() -> Self {
        let d = SimConfig::default();
        SimCfg {
            n_runs: d.n_runs,
            seed: d.seed,
            dt: None,
            t_end: None,
            ring_length: 1000,
            policy: PolicyChoice::Optimal,
        }
    }
}

impl SimCfg {
    pub fn build(&self) -> Result<SimConfig> {
        for (name, v) in [("sim.dt", self.dt), ("sim.t_end", self.t_end)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::config(name, "must be finite and > 0"));
                }
            }
        }
        if self.ring_length < 3 {
            return Err(CliError::config("sim.ring_length", "ring needs at least 3 nodes"));
        }
        let c = SimConfig {
            n_runs: self.n_runs,
            seed: self.seed,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Node response; ignored by the heterogeneous models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<ResponseCfg>,
    /// The two equal-size groups of the heterogeneous models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<[ResponseCfg; 2]>,
    pub economics: EconomicsCfg,
    /// Size `M` of the complete network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    /// Network JSON file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_file: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverCfg,
    #[serde(default)]
    pub sim: SimCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn prefixed(at: &str, e: bassopt_core::Error) -> CliError {
    match e {
        bassopt_core::Error::InvalidParameter { name, reason } => CliError::config(format!("{at}.{name}"), reason),
        other => CliError::config(at, other),
    }
}

/// Sets the dotted `path` of a JSON document, creating objects on the way.
/// The value is read as JSON when it parses, otherwise as a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "override must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::config(key, "empty key segment"));
        }
        if !node.is_object() {
            return Err(CliError::config(parts[..i].join("."), "cannot set a field inside a non-object value"));
        }
        let obj = node.as_object_mut().expect("checked above");
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one segment")
}

impl RunConfig {
    /// Reads `path` (or starts from an empty document), applies the
    /// overrides in order and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p.display(), e))?;
                serde_json::from_str(&text).map_err(|e| CliError::config(p.display(), e))?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg = Self::from_value(doc)?;
        if let (Some(file), Some(p)) = (&cfg.network_file, path) {
            if file.is_relative() {
                if let Some(dir) = p.parent() {
                    cfg.network_file = Some(dir.join(file));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(doc: Value) -> Result<Self> {
        serde_path_to_error::deserialize(doc).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "<root>".into() } else { path }, e.into_inner())
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| CliError::config("<input>", e))?;
        let cfg = Self::from_value(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn response(&self) -> Result<ResponseModel> {
        self.response
            .as_ref()
            .ok_or_else(|| CliError::config("response", format!("required for model {}", self.model.as_str())))?
            .build("response")
    }

    pub fn groups(&self) -> Result<[ResponseModel; 2]> {
        let g = self
            .groups
            .as_ref()
            .ok_or_else(|| CliError::config("groups", format!("required for model {}", self.model.as_str())))?;
        Ok([g[0].build("groups.0")?, g[1].build("groups.1")?])
    }

    pub fn economics(&self) -> Result<Economics> {
        self.economics.build()
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        self.solver.build()
    }

    pub fn nodes(&self) -> Result<usize> {
        match self.nodes {
            Some(m) if m >= 2 => Ok(m),
            Some(_) => Err(CliError::config("nodes", "complete network needs at least 2 nodes")),
            None => Err(CliError::config("nodes", "required for model complete")),
        }
    }

    /// Network spec for the general model, inline or from `network_file`.
    pub fn network_spec(&self) -> Result<NetworkSpec> {
        match (&self.network, &self.network_file) {
            (Some(_), Some(_)) => Err(CliError::config("network_file", "give either network or network_file, not both")),
            (Some(n), None) => Ok(n.clone()),
            (None, Some(f)) => NetworkSpec::read(f),
            (None, None) => Err(CliError::config("network", format!("required for model {}", self.model.as_str()))),
        }
    }

    /// Checks every component the selected model uses.
    pub fn validate(&self) -> Result<()> {
        self.economics()?;
        self.solver()?;
        self.sim.build()?;
        match self.model {
            ModelKind::Complete => {
                self.response()?;
                self.nodes()?;
            }
            ModelKind::InfiniteComplete | ModelKind::Line => {
                self.response()?;
            }
            ModelKind::General => {
                let resp = self.response.as_ref().map(|r| r.build("response")).transpose()?;
                self.network_spec()?.build(resp.as_ref())?;
            }
            ModelKind::HeteroUniform | ModelKind::HeteroTargeted => {
                self.groups()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": "infinite-complete",
        "response": {"p0": 0.01, "bp": 0.01, "q0": 0.1, "bq": 0.1},
        "economics": {"gamma": 1000, "theta": 0.01}
    }"#;

    fn err_path(e: CliError) -> String {
        match e {
            CliError::Config { path, .. } => path,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.economics.horizon, HorizonCfg::Infinite);
        assert_eq!(c.solver, SolverCfg::default());
        assert_eq!(c.solver().unwrap(), SolverConfig::default());
    }

    #[test]
    fn missing_gamma_names_the_field() {
        let text = BASE.replace("\"gamma\": 1000, ", "");
        let e = RunConfig::from_json(&text).unwrap_err();
        let msg = e.to_string();
        assert_eq!(err_path(e), "economics");
        assert!(msg.contains("gamma"), "{msg}");
    }

    #[test]
    fn bad_values_report_paths() {
        let text = BASE.replace("\"bp\": 0.01", "\"bp\": -1");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "response.bp");
        let text = BASE.replace("\"theta\": 0.01", "\"theta\": \"x\"");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "economics.theta");
        let text = BASE.replace("\"theta\": 0.01", "\"theta\": 0.01, \"horizon\": \"soon\"");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "economics.horizon");
    }

    #[test]
    fn overrides_patch_nested_fields() {
        let mut doc: Value = serde_json::from_str(BASE).unwrap();
        apply_override(&mut doc, "economics.horizon=20").unwrap();
        apply_override(&mut doc, "solver.method=shooting").unwrap();
        apply_override(&mut doc, "model=line").unwrap();
        let c = RunConfig::from_value(doc).unwrap();
        assert_eq!(c.economics.horizon, HorizonCfg::Finite(20.0));
        assert_eq!(c.solver.method, MethodCfg::Shooting);
        assert_eq!(c.model, ModelKind::Line);
        let mut doc: Value = serde_json::from_str(BASE).unwrap();
        assert!(apply_override(&mut doc, "model.x=1").is_err());
        assert!(apply_override(&mut doc, "novalue").is_err());
    }

    #[test]
    fn horizon_roundtrip() {
        for h in [HorizonCfg::Infinite, HorizonCfg::Finite(12.5)] {
            let s = serde_json::to_string(&h).unwrap();
            assert_eq!(serde_json::from_str::<HorizonCfg>(&s).unwrap(), h);
        }
    }

    #[test]
    fn model_specific_requirements() {
        let text = BASE.replace("infinite-complete", "complete");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "nodes");
        let text = BASE.replace("infinite-complete", "hetero-uniform");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "groups");
        let text = BASE.replace("infinite-complete", "general");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "network");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = BASE.replace("\"theta\": 0.01", "\"theta\": 0.01, \"gama\": 3");
        assert_eq!(err_path(RunConfig::from_json(&text).unwrap_err()), "economics.gama");
    }
}
