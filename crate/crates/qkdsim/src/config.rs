//! Scenario configuration files and bundled presets.

use crate::params::{InvalidParam, RunConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Result file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A run configuration plus ensemble size and output destination, as read
/// from a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_name: String,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
    pub run: RunConfig,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), InvalidParam> {
        if self.trials < 1 {
            return Err(InvalidParam { field: "trials", message: "must be >= 1".into() });
        }
        self.run.validate()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config `{path}`: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Invalid(#[from] InvalidParam),
    #[error("`{0}` is neither a config file nor a known preset (presets: {})", PRESET_NAMES.join(", "))]
    UnknownPreset(String),
}

/// Built-in scenario presets mirroring the reference parameter sets.
pub const PRESET_NAMES: [&str; 2] = ["paper-noneve", "paper-eve30"];

fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "paper-noneve" => Some(include_str!("../configs/paper_noneve.json")),
        "paper-eve30" => Some(include_str!("../configs/paper_eve30.json")),
        _ => None,
    }
}

fn parse(path: &str, text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = serde_json::from_str(text)
        .map_err(|source| ConfigError::Parse { path: path.to_string(), source })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Load and validate a scenario config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&path.display().to_string(), &text)
}

/// Load a preset by name.
pub fn load_preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let text = preset_source(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    parse(name, text)
}

/// Resolve a `--config` argument: an existing file path wins, otherwise a
/// preset name is tried.
pub fn resolve_config(name_or_path: &str) -> Result<ScenarioConfig, ConfigError> {
    let path = Path::new(name_or_path);
    if path.exists() {
        return load_config(path);
    }
    if preset_source(name_or_path).is_some() {
        return load_preset(name_or_path);
    }
    Err(ConfigError::UnknownPreset(name_or_path.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_carry_reference_parameters() {
        let cfg = load_preset("paper-noneve").unwrap();
        assert_eq!(cfg.run.source.pump_rate, 1e9);
        assert_eq!(cfg.run.source.first_pair_prob, 4e-6);
        assert!((cfg.run.source.second_pair_prob - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(cfg.run.source.eve_prob, 0.0);
        assert_eq!(cfg.run.detector.v_d, 2e-4);
        assert_eq!(cfg.run.detector.eta_d, 0.8);
        assert_eq!(cfg.run.detector.rho_d, 0.8);
        assert_eq!(cfg.run.desired_key_length, 300);
        assert_eq!(cfg.trials, 50);

        let eve = load_preset("paper-eve30").unwrap();
        assert!((eve.run.source.eve_prob - 0.3).abs() < 1e-12);
        assert_eq!(eve.run.desired_key_length, 48);
    }

    #[test]
    fn missing_field_names_it() {
        let text = r#"{
            "scenario_name": "x", "trials": 1,
            "run": {
                "desired_key_length": 10,
                "source": {"first_pair_prob": 1.0, "second_pair_prob": 0.0, "eve_prob": 0.0},
                "detector": {"eta_d": 1.0, "v_d": 0.0, "rho_d": 1.0}
            }
        }"#;
        let err = parse("inline", text).unwrap_err();
        assert!(err.to_string().contains("pump_rate"), "{err}");
    }

    #[test]
    fn unknown_field_rejected_by_name() {
        let text = r#"{
            "scenario_name": "x", "trials": 1, "frobnicate": 3,
            "run": {
                "desired_key_length": 10,
                "source": {"pump_rate": 1e9, "first_pair_prob": 1.0, "second_pair_prob": 0.0, "eve_prob": 0.0},
                "detector": {"eta_d": 1.0, "v_d": 0.0, "rho_d": 1.0}
            }
        }"#;
        let err = parse("inline", text).unwrap_err();
        assert!(err.to_string().contains("frobnicate"), "{err}");
    }

    #[test]
    fn range_violation_names_dotted_field() {
        let text = r#"{
            "scenario_name": "x", "trials": 1,
            "run": {
                "desired_key_length": 10,
                "source": {"pump_rate": 1e9, "first_pair_prob": 1.0, "second_pair_prob": 0.0, "eve_prob": 0.0},
                "detector": {"eta_d": 1.3, "v_d": 0.0, "rho_d": 1.0}
            }
        }"#;
        match parse("inline", text).unwrap_err() {
            ConfigError::Invalid(p) => assert_eq!(p.field, "detector.eta_d"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn round_trips_losslessly() {
        let cfg = load_preset("paper-eve30").unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn unknown_name_lists_presets() {
        let err = resolve_config("nope").unwrap_err();
        assert!(err.to_string().contains("paper-noneve"), "{err}");
    }
}
