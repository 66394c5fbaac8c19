//! Command-line front end: config ingestion, flag overrides, ensemble
//! execution, and result emission.

use crate::config::{resolve_config, OutputFormat, ScenarioConfig};
use crate::output::{write_csv, write_json};
use crate::pipeline::{run_ensemble_with_jobs, EnsembleSummary};
use clap::Parser;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment fallback seed source; the --seed flag wins.
pub const SEED_ENV_VAR: &str = "QKDSIM_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "qkdsim",
    about = "Monte Carlo simulator of an entanglement-based QKD link",
    disable_help_subcommand = true
)]
pub struct Args {
    /// Scenario config file path, or a preset name (paper-noneve, paper-eve30).
    #[arg(long)]
    pub config: String,
    /// Root seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of ensemble trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads for the trial fan-out.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Eavesdropper interception probability override.
    #[arg(long = "eve-prob")]
    pub eve_prob: Option<f64>,
    /// Desired secret key length override.
    #[arg(long = "key-length")]
    pub key_length: Option<usize>,
    /// Output file; stdout when neither this flag nor the config set one.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format override.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Exit nonzero if any trial fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn apply_overrides(scenario: &mut ScenarioConfig, args: &Args) -> Result<(), String> {
    if let Some(seed) = args.seed {
        scenario.run.seed = seed;
    } else if let Ok(text) = std::env::var(SEED_ENV_VAR) {
        scenario.run.seed = text
            .parse::<u64>()
            .map_err(|_| format!("{SEED_ENV_VAR}={text} is not a valid 64-bit seed"))?;
    }
    if let Some(trials) = args.trials {
        scenario.trials = trials;
    }
    if let Some(p) = args.eve_prob {
        scenario.run.source.eve_prob = p;
    }
    if let Some(len) = args.key_length {
        scenario.run.desired_key_length = len;
    }
    if let Some(path) = &args.output {
        scenario.output_path = Some(path.clone());
    }
    if let Some(fmt) = args.format {
        scenario.output_format = fmt.into();
    }
    Ok(())
}

fn emit(scenario: &ScenarioConfig, summary: &EnsembleSummary) -> std::io::Result<()> {
    let mut buffer = Vec::new();
    match scenario.output_format {
        OutputFormat::Csv => write_csv(&mut buffer, summary)?,
        OutputFormat::Json => write_json(&mut buffer, scenario, summary)?,
    }
    match &scenario.output_path {
        Some(path) => std::fs::write(path, buffer),
        None => std::io::stdout().write_all(&buffer),
    }
}

fn summary_line(scenario: &ScenarioConfig, summary: &EnsembleSummary) -> String {
    match &summary.stats {
        Some(stats) => format!(
            "{}: {} trials, mean |S| {:.3}, mean raw QBER {:.4}, mean secret rate {:.1} bit/s, eve detection {:.0}%, {} failed",
            scenario.scenario_name,
            summary.trials.len(),
            stats.s_value.mean.abs(),
            stats.raw_qber.mean,
            stats.secret_key_rate.mean,
            100.0 * summary.eve_detection_rate,
            summary.failed
        ),
        None => format!(
            "{}: all {} trials failed",
            scenario.scenario_name,
            summary.trials.len()
        ),
    }
}

/// Execute a parsed invocation. Returns the process exit status.
pub fn run_command(args: &Args) -> i32 {
    let mut scenario = match resolve_config(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(msg) = apply_overrides(&mut scenario, args) {
        eprintln!("config error: {msg}");
        return EXIT_CONFIG;
    }
    if let Err(e) = scenario.validate() {
        eprintln!("config error: {e}");
        return EXIT_CONFIG;
    }

    let summary = run_ensemble_with_jobs(&scenario.run, scenario.trials, args.jobs);

    if let Err(e) = emit(&scenario, &summary) {
        eprintln!("output error: {e}");
        return EXIT_RUNTIME;
    }

    // keep stdout clean for piping when results go there
    let line = summary_line(&scenario, &summary);
    if scenario.output_path.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }

    for t in &summary.trials {
        if let Err(e) = &t.outcome {
            eprintln!("trial {} (seed {}) failed: {e}", t.index, t.seed);
        }
    }
    if args.strict && summary.failed > 0 {
        return EXIT_RUNTIME;
    }
    EXIT_OK
}

/// Parse argv and run. Clap errors (including --help) map to their usual
/// conventions; bad flags exit with the config-error status.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Args::try_parse_from(argv) {
        Ok(args) => run_command(&args),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
