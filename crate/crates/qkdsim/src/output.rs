//! Machine-readable result emitters. Both formats are deterministic byte
//! for byte given the same ensemble.

use crate::config::ScenarioConfig;
use crate::pipeline::{EnsembleSummary, LinkBudget, StatSummary};
use serde::Serialize;
use std::io::{self, Write};

/// Fixed CSV column order, one column per link-budget statistic.
pub const CSV_COLUMNS: &str = "trial_index,seed,s_value,raw_qber,reconciled_corrected_qber,\
reconciled_uncorrected_qber,raw_key_rate,reconciled_key_rate,secret_key_rate,elapsed_time,eve_detected";

fn csv_row(index: usize, seed: u64, b: &LinkBudget) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        index,
        seed,
        b.s_value,
        b.raw_qber,
        b.reconciled_corrected_qber,
        b.reconciled_uncorrected_qber,
        b.raw_key_rate,
        b.reconciled_key_rate,
        b.secret_key_rate,
        b.elapsed_time,
        b.eve_detected
    )
}

/// Write per-trial rows plus a `#`-prefixed summary block.
pub fn write_csv<W: Write>(w: &mut W, summary: &EnsembleSummary) -> io::Result<()> {
    writeln!(w, "{CSV_COLUMNS}")?;
    for t in &summary.trials {
        match &t.outcome {
            Ok(b) => writeln!(w, "{}", csv_row(t.index, t.seed, b))?,
            Err(e) => writeln!(w, "# trial_error,{},{},{}", t.index, t.seed, e)?,
        }
    }
    if let Some(stats) = &summary.stats {
        writeln!(w, "# summary,statistic,mean,std,min,max")?;
        let mut stat = |name: &str, s: &StatSummary| {
            writeln!(w, "# summary,{},{},{},{},{}", name, s.mean, s.std, s.min, s.max)
        };
        stat("s_value", &stats.s_value)?;
        stat("raw_qber", &stats.raw_qber)?;
        stat("reconciled_corrected_qber", &stats.reconciled_corrected_qber)?;
        stat("reconciled_uncorrected_qber", &stats.reconciled_uncorrected_qber)?;
        stat("raw_key_rate", &stats.raw_key_rate)?;
        stat("reconciled_key_rate", &stats.reconciled_key_rate)?;
        stat("secret_key_rate", &stats.secret_key_rate)?;
        stat("elapsed_time", &stats.elapsed_time)?;
    }
    writeln!(w, "# eve_detection_rate,{}", summary.eve_detection_rate)?;
    writeln!(w, "# completed,{}", summary.completed)?;
    writeln!(w, "# failed,{}", summary.failed)
}

#[derive(Serialize)]
#[serde(untagged)]
enum TrialJson<'a> {
    Ok { trial_index: usize, seed: u64, link_budget: &'a LinkBudget },
    Err { trial_index: usize, seed: u64, error: String },
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<&'a crate::pipeline::SummaryStats>,
    eve_detection_rate: f64,
    completed: usize,
    failed: usize,
}

/// Schema-versioned JSON envelope with config, trials, and summary.
#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    scenario: &'a ScenarioConfig,
    trials: Vec<TrialJson<'a>>,
    summary: SummaryJson<'a>,
}

pub fn write_json<W: Write>(
    w: &mut W,
    scenario: &ScenarioConfig,
    summary: &EnsembleSummary,
) -> io::Result<()> {
    let trials = summary
        .trials
        .iter()
        .map(|t| match &t.outcome {
            Ok(b) => TrialJson::Ok { trial_index: t.index, seed: t.seed, link_budget: b },
            Err(e) => TrialJson::Err { trial_index: t.index, seed: t.seed, error: e.to_string() },
        })
        .collect();
    let envelope = Envelope {
        schema_version: 1,
        scenario,
        trials,
        summary: SummaryJson {
            stats: summary.stats.as_ref(),
            eve_detection_rate: summary.eve_detection_rate,
            completed: summary.completed,
            failed: summary.failed,
        },
    };
    serde_json::to_writer_pretty(&mut *w, &envelope)?;
    writeln!(w)
}
