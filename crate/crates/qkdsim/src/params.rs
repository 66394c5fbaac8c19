//! Source, detector, and per-trial run parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A parameter failed its range or consistency constraint. `field` is the
/// dotted path of the offending value in the config schema.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("invalid value for `{field}`: {message}")]
pub struct InvalidParam {
    pub field: &'static str,
    pub message: String,
}

fn check_prob(field: &'static str, v: f64) -> Result<(), InvalidParam> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(InvalidParam { field, message: format!("{v} is outside [0, 1]") });
    }
    Ok(())
}

/// Entangled-pair source and channel parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    /// Pump events per second.
    pub pump_rate: f64,
    /// Probability of one entangled pair per pump.
    pub first_pair_prob: f64,
    /// Probability of an additional pair given a first pair.
    pub second_pair_prob: f64,
    /// Probability any given transmitted pair is intercepted.
    pub eve_prob: f64,
}

impl SourceParams {
    pub fn validate(&self) -> Result<(), InvalidParam> {
        if !(self.pump_rate > 0.0) {
            return Err(InvalidParam {
                field: "source.pump_rate",
                message: format!("{} must be > 0", self.pump_rate),
            });
        }
        check_prob("source.first_pair_prob", self.first_pair_prob)?;
        check_prob("source.second_pair_prob", self.second_pair_prob)?;
        check_prob("source.eve_prob", self.eve_prob)
    }
}

/// Detector response parameters for the photon-reception model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    /// Effective detection efficiency.
    pub eta_d: f64,
    /// Noise (dark) count probability, also the bit-flip probability.
    pub v_d: f64,
    /// Photon-number-resolution parameter: 0 none, 1 ideal.
    pub rho_d: f64,
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), InvalidParam> {
        check_prob("detector.eta_d", self.eta_d)?;
        check_prob("detector.v_d", self.v_d)?;
        check_prob("detector.rho_d", self.rho_d)
    }
}

fn default_excess_bit_factor() -> f64 {
    2.0
}
fn default_cascade_iterations() -> usize {
    4
}
fn default_pump_ceiling() -> u64 {
    10_000_000_000
}

/// Full configuration of a single trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Secret key length the trial distills to.
    pub desired_key_length: usize,
    /// Raw-key oversampling multiplier (conventionally 2).
    #[serde(default = "default_excess_bit_factor")]
    pub excess_bit_factor: f64,
    /// Reconciliation passes (conventionally 4).
    #[serde(default = "default_cascade_iterations")]
    pub cascade_iterations: usize,
    pub source: SourceParams,
    pub detector: DetectorParams,
    /// Root seed of the trial's random stream.
    #[serde(default)]
    pub seed: u64,
    /// Abort guard: maximum pump events before bit generation gives up.
    #[serde(default = "default_pump_ceiling")]
    pub pump_ceiling: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), InvalidParam> {
        if self.desired_key_length < 1 {
            return Err(InvalidParam {
                field: "desired_key_length",
                message: "must be >= 1".into(),
            });
        }
        if !(self.excess_bit_factor >= 1.0) {
            return Err(InvalidParam {
                field: "excess_bit_factor",
                message: format!("{} must be >= 1", self.excess_bit_factor),
            });
        }
        if self.cascade_iterations < 1 {
            return Err(InvalidParam {
                field: "cascade_iterations",
                message: "must be >= 1".into(),
            });
        }
        self.source.validate()?;
        self.detector.validate()
    }
}
