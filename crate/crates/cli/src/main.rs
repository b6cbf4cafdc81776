//! `conelab` — config-driven experiments on random symmetric polytopes
//! spanned by cone-measure samples, plus the module verification suite.
//!
//! Exit codes: 0 success, 1 hard-check or run failure, 2 config error.

use clap::{Parser, Subcommand};
use conelab::experiment::report as exp_report;
use conelab::experiment::suite::{run_verification_suite, CheckStatus, SuiteConfig};
use conelab::experiment::{
    run_general_experiment, run_unconditional_experiment, run_volume_radius_check,
    ExperimentConfig, ExperimentMode,
};
use conelab::sampling::{sample_cone_boundary, sample_uniform, StreamRng};
use conelab::BodySpec;
use serde::Deserialize;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "conelab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite (hard + statistical checks).
    Verify {
        /// Master seed for the suite streams.
        #[arg(long, default_value_t = 20_260_810)]
        seed: u64,
        /// Sample count for the statistical checks.
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        /// Instance count for the randomized exact checks.
        #[arg(long, default_value_t = 40)]
        instances: usize,
        /// Write the full JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a theorem-shape experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the coupled volume-radius comparison from a JSON config.
    VolumeRadius {
        #[arg(long)]
        config: PathBuf,
    },
    /// Draw a sample batch and write it as CSV.
    Sample {
        /// Body spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        body: String,
        /// Distribution: "cone" or "uniform".
        #[arg(long)]
        dist: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Experiment config file: the core config plus mode and output paths.
#[derive(Deserialize)]
struct ExperimentFile {
    mode: ExperimentMode,
    #[serde(flatten)]
    config: ExperimentConfig,
    out_csv: Option<PathBuf>,
    out_json: Option<PathBuf>,
}

#[derive(Deserialize)]
struct VolumeRadiusFile {
    #[serde(flatten)]
    config: ExperimentConfig,
    out_csv: Option<PathBuf>,
    out_json: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    Config(String),
    Run(String),
}

fn run() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            seed,
            samples,
            instances,
            out,
        } => {
            let report = run_verification_suite(SuiteConfig {
                master_seed: seed,
                sample_count: samples,
                instances,
            });
            for check in &report.checks {
                let status = match check.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::WidenedBand => "WIDENED-BAND",
                };
                let kind = if check.hard { "hard" } else { "statistical" };
                println!("{status:12} {kind:11} {}", check.name);
            }
            println!(
                "suite: {} checks, {} hard failures, {} statistical failures, {} widened",
                report.checks.len(),
                report.hard_failures,
                report.statistical_failures,
                report.widened
            );
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| CliError::Run(e.to_string()))?;
                fs::write(&path, json).map_err(|e| CliError::Run(e.to_string()))?;
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Experiment { config } => {
            let file: ExperimentFile = read_json(&config)?;
            file.config
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let report = match file.mode {
                ExperimentMode::Unconditional => run_unconditional_experiment(&file.config),
                ExperimentMode::General => run_general_experiment(&file.config),
            }
            .map_err(|e| match e {
                conelab::experiment::ExperimentError::Config(msg) => CliError::Config(msg),
                other => CliError::Run(other.to_string()),
            })?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = &file.out_csv {
                let mut buf = Vec::new();
                exp_report::write_experiment_csv(&report, &mut buf)
                    .map_err(|e| CliError::Run(e.to_string()))?;
                fs::write(path, buf).map_err(|e| CliError::Run(e.to_string()))?;
            }
            if let Some(path) = &file.out_json {
                let mut buf = Vec::new();
                exp_report::write_experiment_summary(&report, &mut buf)
                    .map_err(|e| CliError::Run(e.to_string()))?;
                fs::write(path, buf).map_err(|e| CliError::Run(e.to_string()))?;
            }
            println!(
                "experiment: {} rows, {} failed trials, max L = {:.4}, pass = {}",
                report.rows.len(),
                report.failures.len(),
                report.max_l,
                report.pass
            );
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::VolumeRadius { config } => {
            let file: VolumeRadiusFile = read_json(&config)?;
            file.config
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let report = run_volume_radius_check(&file.config).map_err(|e| match e {
                conelab::experiment::ExperimentError::Config(msg) => CliError::Config(msg),
                other => CliError::Run(other.to_string()),
            })?;
            if let Some(path) = &file.out_csv {
                let mut buf = Vec::new();
                exp_report::write_volume_radius_csv(&report, &mut buf)
                    .map_err(|e| CliError::Run(e.to_string()))?;
                fs::write(path, buf).map_err(|e| CliError::Run(e.to_string()))?;
            }
            if let Some(path) = &file.out_json {
                let mut buf = Vec::new();
                exp_report::write_volume_radius_summary(&report, &mut buf)
                    .map_err(|e| CliError::Run(e.to_string()))?;
                fs::write(path, buf).map_err(|e| CliError::Run(e.to_string()))?;
            }
            println!(
                "volume-radius: {} rows, pass = {} (inclusion holds in every trial: {})",
                report.rows.len(),
                report.pass,
                report
                    .summaries
                    .iter()
                    .all(|s| s.inclusion_fraction == 1.0)
            );
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sample {
            body,
            dist,
            count,
            seed,
            stream,
            out,
        } => {
            let body_json = if body.trim_start().starts_with('{') {
                body
            } else {
                fs::read_to_string(&body).map_err(|e| CliError::Config(e.to_string()))?
            };
            let spec: BodySpec =
                serde_json::from_str(&body_json).map_err(|e| CliError::Config(e.to_string()))?;
            spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
            if count == 0 {
                return Err(CliError::Config("count must be positive".into()));
            }
            let rng = StreamRng::new(seed, stream);
            let batch = match dist.as_str() {
                "cone" => sample_cone_boundary(&spec, count, rng),
                "uniform" => sample_uniform(&spec, count, rng),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown distribution {other:?}; use cone or uniform"
                    )))
                }
            }
            .map_err(|e| CliError::Run(e.to_string()))?;
            let mut buf = Vec::new();
            batch
                .write_csv(&mut buf)
                .map_err(|e| CliError::Run(e.to_string()))?;
            fs::write(&out, buf).map_err(|e| CliError::Run(e.to_string()))?;
            println!("wrote {} points to {}", count, out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
