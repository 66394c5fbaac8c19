//! Orchestration of the three stages into per-trial link budgets and
//! seeded ensembles.

use crate::bitgen::{run_bit_generation, BitGenError};
use crate::cascade::run_cascade;
use crate::params::RunConfig;
use crate::parityhash::{run_privacy_amplification, PrivacyAmplificationError};
use crate::stream::RandomStream;
use serde::Serialize;
use thiserror::Error;

/// The full per-trial statistic bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub s_value: f64,
    pub raw_qber: f64,
    pub reconciled_corrected_qber: f64,
    pub reconciled_uncorrected_qber: f64,
    /// Same-basis coincidences per second.
    pub raw_key_rate: f64,
    /// Uncompromised reconciled bits per second.
    pub reconciled_key_rate: f64,
    /// Secret bits per second.
    pub secret_key_rate: f64,
    pub elapsed_time: f64,
    /// True when |S| fails to violate the classical limit, i.e. |S| <= 2.
    /// The run still completes distillation for diagnostics, but the key
    /// should be discarded.
    pub eve_detected: bool,
    pub trial_seed: u64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TrialError {
    #[error("bit generation: {0}")]
    BitGeneration(#[from] BitGenError),
    #[error("privacy amplification: {0}")]
    PrivacyAmplification(#[from] PrivacyAmplificationError),
}

/// Run bit generation, Cascade, and the parity hash with one random
/// stream, and assemble the link budget.
pub fn run_trial(cfg: &RunConfig) -> Result<LinkBudget, TrialError> {
    let mut stream = RandomStream::new(cfg.seed);
    let bg = run_bit_generation(cfg, &mut stream)?;
    let key_len = bg.alice_raw_key.len();

    let cascade = run_cascade(
        &bg.alice_raw_key,
        &bg.bob_raw_key,
        cfg.cascade_iterations,
        bg.raw_qber,
        &mut stream,
    );

    let pa = run_privacy_amplification(
        &cascade.alice_key,
        &cascade.bob_key,
        cfg.desired_key_length,
        bg.elapsed_time,
    )?;

    let uncompromised = key_len.saturating_sub(cascade.leaked_bits as usize);
    Ok(LinkBudget {
        s_value: bg.s_value,
        raw_qber: bg.raw_qber,
        reconciled_corrected_qber: cascade.corrected_errors as f64 / key_len as f64,
        reconciled_uncorrected_qber: cascade.residual_errors as f64 / key_len as f64,
        raw_key_rate: bg.raw_key_rate,
        reconciled_key_rate: uncompromised as f64 / bg.elapsed_time,
        secret_key_rate: pa.secret_key_rate,
        elapsed_time: bg.elapsed_time,
        eve_detected: bg.s_value.abs() <= 2.0,
        trial_seed: cfg.seed,
    })
}

/// One trial of an ensemble, successful or not.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub outcome: Result<LinkBudget, TrialError>,
}

/// Mean, standard deviation (population), min, and max of one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl StatSummary {
    fn over(values: impl Iterator<Item = f64> + Clone) -> StatSummary {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        StatSummary {
            mean,
            std: var.sqrt(),
            min: values.clone().fold(f64::INFINITY, f64::min),
            max: values.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Summaries of every numeric link-budget statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub s_value: StatSummary,
    pub raw_qber: StatSummary,
    pub reconciled_corrected_qber: StatSummary,
    pub reconciled_uncorrected_qber: StatSummary,
    pub raw_key_rate: StatSummary,
    pub reconciled_key_rate: StatSummary,
    pub secret_key_rate: StatSummary,
    pub elapsed_time: StatSummary,
}

impl SummaryStats {
    /// Recompute the summaries from a list of budgets. Returns None for an
    /// empty list.
    pub fn from_budgets(budgets: &[LinkBudget]) -> Option<SummaryStats> {
        if budgets.is_empty() {
            return None;
        }
        macro_rules! stat {
            ($field:ident) => {
                StatSummary::over(budgets.iter().map(|b| b.$field))
            };
        }
        Some(SummaryStats {
            s_value: stat!(s_value),
            raw_qber: stat!(raw_qber),
            reconciled_corrected_qber: stat!(reconciled_corrected_qber),
            reconciled_uncorrected_qber: stat!(reconciled_uncorrected_qber),
            raw_key_rate: stat!(raw_key_rate),
            reconciled_key_rate: stat!(reconciled_key_rate),
            secret_key_rate: stat!(secret_key_rate),
            elapsed_time: stat!(elapsed_time),
        })
    }
}

/// Per-trial outcomes plus aggregate statistics for an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub trials: Vec<TrialRecord>,
    /// None when every trial failed.
    pub stats: Option<SummaryStats>,
    /// Fraction of completed trials flagged eve_detected.
    pub eve_detection_rate: f64,
    pub completed: usize,
    pub failed: usize,
}

impl EnsembleSummary {
    pub fn budgets(&self) -> Vec<LinkBudget> {
        self.trials.iter().filter_map(|t| t.outcome.clone().ok()).collect()
    }
}

fn summarize(trials: Vec<TrialRecord>) -> EnsembleSummary {
    let budgets: Vec<LinkBudget> =
        trials.iter().filter_map(|t| t.outcome.clone().ok()).collect();
    let completed = budgets.len();
    let detected = budgets.iter().filter(|b| b.eve_detected).count();
    EnsembleSummary {
        failed: trials.len() - completed,
        stats: SummaryStats::from_budgets(&budgets),
        eve_detection_rate: if completed > 0 { detected as f64 / completed as f64 } else { 0.0 },
        completed,
        trials,
    }
}

fn trial_config(cfg: &RunConfig, index: usize) -> RunConfig {
    let mut child = cfg.clone();
    child.seed = cfg.seed.wrapping_add(index as u64);
    child
}

/// Run `trials` independent trials with child seeds `seed + index`.
/// Failed trials are recorded, not dropped.
pub fn run_ensemble(cfg: &RunConfig, trials: usize) -> EnsembleSummary {
    let records = (0..trials)
        .map(|i| {
            let child = trial_config(cfg, i);
            TrialRecord { index: i, seed: child.seed, outcome: run_trial(&child) }
        })
        .collect();
    summarize(records)
}

/// Same as [`run_ensemble`] but fanned out over `jobs` worker threads.
/// Trial ordering, and therefore the summary, is schedule-independent.
pub fn run_ensemble_with_jobs(cfg: &RunConfig, trials: usize, jobs: usize) -> EnsembleSummary {
    if jobs <= 1 {
        return run_ensemble(cfg, trials);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("worker pool");
    let records = pool.install(|| {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let child = trial_config(cfg, i);
                TrialRecord { index: i, seed: child.seed, outcome: run_trial(&child) }
            })
            .collect::<Vec<_>>()
    });
    summarize(records)
}
