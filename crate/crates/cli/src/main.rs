//! `specrank`: batch Monte-Carlo driver for the spectral ranking library.
//!
//! Subcommands:
//! - `run <config>`: execute a sweep, writing records.csv, summary.csv, and
//!   SVG plots into the output directory.
//! - `validate <config>`: run the lemma-check suites at their calibrated
//!   constants, writing lemma_checks.csv; exits 2 if any check fails.
//! - `calibrate`: re-run the calibration pilot and write calibration.txt.
//! - `demo`: noiseless 10-item smoke test.
//!
//! Exit codes: 0 success, 1 configuration error, 2 failed lemma check.
//! The `SPECRANK_OUT` environment variable overrides the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use specrank_core::experiment::{
    self, ExperimentConfig, ValidateSettings,
};
use specrank_core::validation::Calibration;

#[derive(Parser)]
#[command(name = "specrank", version, about = "Spectral ranking from noisy pairwise comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a Monte-Carlo sweep described by a config file
    Run {
        /// Config file path (alternative to --config)
        config: Option<PathBuf>,
        /// Config file path
        #[arg(long = "config", value_name = "PATH")]
        config_opt: Option<PathBuf>,
        /// Worker thread count (default: available parallelism)
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory override
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip SVG emission
        #[arg(long)]
        no_plots: bool,
        /// Master seed override
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the lemma-check suites and write lemma_checks.csv
    Validate {
        /// Config file path (uses the n/trials/seed keys)
        config: Option<PathBuf>,
        /// Config file path
        #[arg(long = "config", value_name = "PATH")]
        config_opt: Option<PathBuf>,
        /// Calibration file overriding the shipped constants
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Output directory override
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the calibration pilot and write calibration.txt
    Calibrate {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 271828)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Noiseless smoke test: print the recovered permutations
    Demo,
}

fn env_out_override() -> Option<PathBuf> {
    std::env::var_os("SPECRANK_OUT").map(PathBuf::from)
}

fn load_config(
    positional: Option<PathBuf>,
    flagged: Option<PathBuf>,
) -> Result<ExperimentConfig, String> {
    let path = positional
        .or(flagged)
        .ok_or_else(|| "missing config file (pass a path or --config)".to_string())?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ExperimentConfig::parse(&text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            config_opt,
            workers,
            out,
            no_plots,
            seed,
        } => {
            let mut cfg = match load_config(config, config_opt) {
                Ok(cfg) => cfg,
                Err(msg) => return config_failure(&msg),
            };
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(dir) = out.or_else(env_out_override) {
                cfg.output_dir = dir;
            }
            if no_plots {
                cfg.emit_plots = false;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Err(e) = cfg.validate() {
                return config_failure(&e.to_string());
            }
            match experiment::run_to_dir(&cfg) {
                Ok(artifacts) => {
                    eprintln!(
                        "sweep finished in {:.1}s; wrote {} and {} plots to {}",
                        artifacts.wall_ms_total as f64 / 1000.0,
                        artifacts.records.display(),
                        artifacts.plots.len(),
                        cfg.output_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => config_failure(&e.to_string()),
            }
        }
        Command::Validate {
            config,
            config_opt,
            calibration,
            out,
        } => {
            let cfg = match load_config(config, config_opt) {
                Ok(cfg) => cfg,
                Err(msg) => return config_failure(&msg),
            };
            if cfg.n_list.is_empty() {
                return config_failure("validate needs an `n` entry in the config");
            }
            let cal = match calibration {
                None => Calibration::embedded_default(),
                Some(path) => {
                    let text = match std::fs::read_to_string(&path) {
                        Ok(t) => t,
                        Err(e) => {
                            return config_failure(&format!(
                                "cannot read {}: {e}",
                                path.display()
                            ))
                        }
                    };
                    match Calibration::parse(&text) {
                        Ok(c) => c,
                        Err(e) => return config_failure(&e.to_string()),
                    }
                }
            };
            let out_dir = out
                .or_else(env_out_override)
                .unwrap_or_else(|| cfg.output_dir.clone());
            let settings = ValidateSettings::from_config(&cfg);
            match experiment::validate_to_dir(&settings, &cal, &out_dir) {
                Ok((results, all_passed)) => {
                    for r in &results {
                        println!(
                            "{}: {} (ratio {:.4} vs bound {}, {} trials{})",
                            r.name,
                            if r.passed { "pass" } else { "FAIL" },
                            r.observed_max_ratio,
                            r.bound_constant,
                            r.trials,
                            r.detail
                                .as_deref()
                                .map(|d| format!(", {d}"))
                                .unwrap_or_default()
                        );
                    }
                    if all_passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => config_failure(&e.to_string()),
            }
        }
        Command::Calibrate { n, trials, seed, out } => {
            let out_dir = env_out_override().unwrap_or(out);
            match experiment::calibrate_to_dir(n, trials, seed, &out_dir) {
                Ok(cal) => {
                    print!("{}", cal.to_text());
                    eprintln!("wrote {}", out_dir.join("calibration.txt").display());
                    ExitCode::SUCCESS
                }
                Err(e) => config_failure(&e.to_string()),
            }
        }
        Command::Demo => match experiment::demo() {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => config_failure(&e.to_string()),
        },
    }
}

fn config_failure(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}
