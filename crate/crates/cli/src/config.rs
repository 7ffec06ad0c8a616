//! Experiment configuration: strict JSON parsing, defaults and validation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use holosup::ensemble::EnsembleSpec;
use holosup::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Study,
    MetricTable,
    Covering,
    Dudley,
    Sudakov,
    KernelSweep,
    Concentration,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Study => "study",
            Command::MetricTable => "metric-table",
            Command::Covering => "covering",
            Command::Dudley => "dudley",
            Command::Sudakov => "sudakov",
            Command::KernelSweep => "kernel-sweep",
            Command::Concentration => "concentration",
            Command::Report => "report",
        }
    }

    /// Override keys the command understands.
    pub fn override_keys(self) -> &'static [&'static str] {
        match self {
            Command::Study => &["trials", "bootstrap_resamples", "record_wall_time"],
            Command::Concentration => &["trials", "bootstrap_resamples", "threshold"],
            Command::MetricTable => &["points"],
            Command::Covering => &["method", "covering_model", "points", "probe_count"],
            Command::Dudley => &["quad_points", "covering_model"],
            Command::Sudakov => &["grid_size", "covering_model"],
            Command::KernelSweep => &["points", "eps", "lambda", "gaussian_window"],
            Command::Report => &["input_dir"],
        }
    }
}

/// Scalar override value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(u64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<EnsembleSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub overrides: BTreeMap<String, Scalar>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config {
            key: path,
            message: e.into_inner().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn config_err(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.command != Command::Report {
            let spec = self
                .spec
                .as_ref()
                .ok_or_else(|| config_err("spec", "required for this command"))?;
            spec.validate()
                .map_err(|e| config_err("spec", e.to_string()))?;
        }
        let s = &self.solver;
        if !(s.grid_factor >= 2.0) || !s.grid_factor.is_finite() {
            return Err(config_err(
                "solver.grid_factor",
                "must be a finite number >= 2",
            ));
        }
        if !(s.refine_tol > 0.0) {
            return Err(config_err("solver.refine_tol", "must be positive"));
        }
        if s.multistart_top_k == 0 {
            return Err(config_err("solver.multistart_top_k", "must be at least 1"));
        }
        let allowed = self.command.override_keys();
        for (key, value) in &self.overrides {
            if !allowed.contains(&key.as_str()) {
                return Err(config_err(
                    &format!("overrides.{key}"),
                    format!("unknown override for command {}", self.command.as_str()),
                ));
            }
            check_override(key, value)?;
        }
        Ok(())
    }

    pub fn spec(&self) -> &EnsembleSpec {
        self.spec.as_ref().expect("validated config has a spec")
    }

    /// Canonical JSON of the settings that determine the results; the
    /// output directory is not part of it.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn usize_override(&self, key: &str, default: usize) -> usize {
        match self.overrides.get(key) {
            Some(Scalar::Int(v)) => *v as usize,
            _ => default,
        }
    }

    pub fn f64_override(&self, key: &str, default: f64) -> f64 {
        match self.overrides.get(key) {
            Some(Scalar::Int(v)) => *v as f64,
            Some(Scalar::Float(v)) => *v,
            _ => default,
        }
    }

    pub fn has_override(&self, key: &str) -> bool {
        self.overrides.contains_key(key)
    }

    pub fn bool_override(&self, key: &str, default: bool) -> bool {
        match self.overrides.get(key) {
            Some(Scalar::Bool(v)) => *v,
            _ => default,
        }
    }

    pub fn text_override<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        match self.overrides.get(key) {
            Some(Scalar::Text(v)) => v,
            _ => default,
        }
    }
}

fn check_override(key: &str, value: &Scalar) -> Result<(), CliError> {
    let path = format!("overrides.{key}");
    let bad = |msg: &str| Err(config_err(&path, msg));
    match key {
        "trials"
        | "bootstrap_resamples"
        | "points"
        | "probe_count"
        | "quad_points"
        | "grid_size" => match value {
            Scalar::Int(v) if *v > 0 => Ok(()),
            _ => bad("expected a positive integer"),
        },
        "record_wall_time" => match value {
            Scalar::Bool(_) => Ok(()),
            _ => bad("expected a boolean"),
        },
        "threshold" | "eps" | "lambda" | "gaussian_window" => match value {
            Scalar::Int(_) => Ok(()),
            Scalar::Float(v) if v.is_finite() => Ok(()),
            _ => bad("expected a finite number"),
        },
        "method" => match value {
            Scalar::Text(v) if v == "formula" || v == "greedy" => Ok(()),
            _ => bad("expected \"formula\" or \"greedy\""),
        },
        "covering_model" => match value {
            Scalar::Text(v) if v == "unit" || v == "calibrated" => Ok(()),
            _ => bad("expected \"unit\" or \"calibrated\""),
        },
        "input_dir" => match value {
            Scalar::Text(v) if !v.is_empty() => Ok(()),
            _ => bad("expected a path"),
        },
        _ => bad("unknown override"),
    }
}
