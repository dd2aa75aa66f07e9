//! Batch experiment drivers: the Monte-Carlo sweep, the lemma-check suite,
//! calibration, and a small smoke demo. The CLI is a thin shell over these.

pub mod config;
pub mod plot;
pub mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ero::{make_ground_truth, EroError, EroParams, GroundTruth, GroundTruthKind};
use crate::population::{snr, PopulationError};
use crate::ranking::{rank_normalized, rank_unnormalized, Method};
use crate::validation::{
    self, Calibration, CalibrationEntry, LemmaCheckResult, ValidationError,
};

pub use config::{ConfigError, ExperimentConfig};
pub use sweep::{aggregate, run_sweep, SummaryRow, SweepOutput, TrialRecord};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] EroError),
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Message(String),
}

/// Paths written by a sweep run.
#[derive(Debug)]
pub struct RunArtifacts {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
    pub wall_ms_total: u64,
}

/// Execute a sweep and persist records.csv, summary.csv, and (optionally)
/// the SVG plots into the config's output directory.
pub fn run_to_dir(cfg: &ExperimentConfig) -> Result<RunArtifacts, DriverError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let out = sweep::run_sweep(cfg)?;

    let records_path = cfg.output_dir.join("records.csv");
    let mut records_file = fs::File::create(&records_path)?;
    sweep::write_records_csv(&mut records_file, &out.records)?;

    let rows = sweep::aggregate(&out.records);
    let summary_path = cfg.output_dir.join("summary.csv");
    let mut summary_file = fs::File::create(&summary_path)?;
    sweep::write_summary_csv(&mut summary_file, &rows)?;

    let mut plots = Vec::new();
    if cfg.emit_plots {
        plots = emit_plots(cfg, &rows, &out)?;
    }

    Ok(RunArtifacts {
        records: records_path,
        summary: summary_path,
        plots,
        wall_ms_total: out.wall_ms_total,
    })
}

fn emit_plots(
    cfg: &ExperimentConfig,
    rows: &[SummaryRow],
    out: &SweepOutput,
) -> Result<Vec<PathBuf>, DriverError> {
    let mut written = Vec::new();
    let multi_n = cfg.n_list.len() > 1;
    for &n in &cfg.n_list {
        let slice: Vec<SummaryRow> = rows.iter().filter(|r| r.n == n).cloned().collect();
        for &method in &cfg.methods {
            for metric in [
                plot::SummaryMetric::RelLinf,
                plot::SummaryMetric::RhoMax,
                plot::SummaryMetric::RhoMean,
            ] {
                let name = if multi_n {
                    format!("heatmap_{}_{}_n{}.svg", metric.name(), method, n)
                } else {
                    format!("heatmap_{}_{}.svg", metric.name(), method)
                };
                let path = cfg.output_dir.join(name);
                match plot::emit_heatmap(&slice, metric, method, &path) {
                    Ok(()) => written.push(path),
                    Err(plot::PlotError::NonRectangularGrid)
                    | Err(plot::PlotError::EmptySelection(_)) => {
                        eprintln!(
                            "note: skipping heatmap {} {} for n={n} (incomplete grid)",
                            metric.name(),
                            method
                        );
                    }
                    Err(plot::PlotError::Io(e)) => return Err(DriverError::Io(e)),
                }
            }
        }
    }
    for (ix, data) in out.errorbars.iter().enumerate() {
        let base = format!("errorbar_{:.2}.svg", data.snr);
        let name = if out
            .errorbars
            .iter()
            .take(ix)
            .any(|d| format!("{:.2}", d.snr) == format!("{:.2}", data.snr))
        {
            format!("errorbar_{:.2}_{}.svg", data.snr, ix)
        } else {
            base
        };
        let path = cfg.output_dir.join(name);
        plot::emit_errorbar(data, &path).map_err(|e| match e {
            plot::PlotError::Io(io) => DriverError::Io(io),
            other => DriverError::Message(other.to_string()),
        })?;
        written.push(path);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Lemma-check suite
// ---------------------------------------------------------------------------

/// Settings for the validation suite; regimes for each check are derived
/// from `n` (documented in the README).
#[derive(Debug, Clone, Copy)]
pub struct ValidateSettings {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Leave-one-out solves an eigenproblem per index; capped at 500.
    pub loo_n: usize,
}

impl ValidateSettings {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        ValidateSettings {
            n,
            trials,
            seed,
            loo_n: n.min(500),
        }
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        ValidateSettings::new(cfg.n_list[0], cfg.trials, cfg.master_seed)
    }
}

fn uniform_gt(n: usize, seed: u64) -> Result<GroundTruth, DriverError> {
    Ok(make_ground_truth(GroundTruthKind::UniformGrid, n, 1.0, 1.0, seed)?)
}

/// Pick (p, eta) hitting a target SNR for this ground truth, keeping
/// eta <= 0.95. When the target exceeds what n allows, the closest feasible
/// point is used.
fn params_for_snr(gt: &GroundTruth, target: f64, seed: u64) -> EroParams {
    let n = gt.n();
    let k = snr(gt, &EroParams { n, p: 1.0, eta: 1.0, seed: 0 });
    let p = ((target / (0.95 * k)) * (target / (0.95 * k))).clamp(0.05, 1.0);
    let eta = (target / (k * p.sqrt())).clamp(0.01, 0.95);
    EroParams { n, p, eta, seed }
}

/// Run the full lemma-check suite at the calibrated constants.
pub fn validate_suite(
    settings: &ValidateSettings,
    calibration: &Calibration,
) -> Result<Vec<LemmaCheckResult>, DriverError> {
    let n = settings.n;
    let trials = settings.trials;
    let seed = settings.seed;
    let gt = uniform_gt(n, seed)?;
    let mut results = Vec::new();

    let pr = EroParams::new(n, 0.2, 0.8, seed)?;
    results.push(validation::check_noise_norm(
        &gt,
        &pr,
        trials,
        calibration.constant("noise_norm")?,
    ));

    let pr = EroParams::new(n, 1.0, 0.5, seed)?;
    results.push(validation::check_row_noise(
        &gt,
        &pr,
        trials,
        calibration.constant("row_noise")?,
    ));

    let pr = params_for_snr(&gt, 2.0, seed);
    results.push(validation::check_davis_kahan(
        &gt,
        &pr,
        trials,
        calibration.constant("davis_kahan")?,
    )?);

    let loo_gt = if settings.loo_n == n {
        gt.clone()
    } else {
        uniform_gt(settings.loo_n, seed)?
    };
    let pr = params_for_snr(&loo_gt, 2.0, seed);
    let k_indices = [0, settings.loo_n / 2 - 1, settings.loo_n - 1];
    results.push(validation::leave_one_out_closeness(
        &loo_gt,
        &pr,
        &k_indices,
        trials,
        calibration.constant("leave_one_out")?,
    )?);

    let pr = EroParams::new(n, 0.3, 0.7, seed)?;
    results.push(validation::check_normalized_noise(
        &gt,
        &pr,
        trials,
        calibration.constant("normalized_noise")?,
    )?);

    let pr = EroParams::new(n, 0.5, 0.7, seed)?;
    results.push(validation::check_weyl(
        &gt,
        &pr,
        trials,
        calibration.constant("weyl")?,
    )?);

    let small = uniform_gt(32, seed)?;
    let pr = EroParams::new(32, 0.7, 0.6, seed)?;
    results.push(validation::check_spectrum_pairing(
        &small,
        &pr,
        trials,
        calibration.constant("spectrum_pairing")?,
    )?);
    results.push(validation::check_interlacing(
        &small,
        &pr,
        trials,
        calibration.constant("interlacing")?,
    )?);

    Ok(results)
}

pub const LEMMA_CSV_HEADER: &str =
    "name,trials,skipped,observed_max_ratio,bound_constant,passed,detail";

pub fn write_lemma_csv<W: Write>(w: &mut W, results: &[LemmaCheckResult]) -> std::io::Result<()> {
    writeln!(w, "{LEMMA_CSV_HEADER}")?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.name,
            r.trials,
            r.skipped,
            r.observed_max_ratio,
            r.bound_constant,
            r.passed,
            r.detail.as_deref().unwrap_or("").replace(',', ";")
        )?;
    }
    Ok(())
}

/// Run the suite and write `lemma_checks.csv`. Returns the results and
/// whether every check passed.
pub fn validate_to_dir(
    settings: &ValidateSettings,
    calibration: &Calibration,
    out_dir: &Path,
) -> Result<(Vec<LemmaCheckResult>, bool), DriverError> {
    fs::create_dir_all(out_dir)?;
    let results = validate_suite(settings, calibration)?;
    let mut file = fs::File::create(out_dir.join("lemma_checks.csv"))?;
    write_lemma_csv(&mut file, &results)?;
    let all_passed = results.iter().all(|r| r.passed);
    Ok((results, all_passed))
}

// ---------------------------------------------------------------------------
// Calibration pilot
// ---------------------------------------------------------------------------

/// The documented pilot: run every check with loose bounds, record the
/// observed maxima, and produce a calibration. The contract constants for
/// noise_norm, row_noise, and davis_kahan stay frozen at 3, 3, 2 (the pilot
/// verifies they hold); the genuinely calibrated checks get 2x the worst
/// observed ratio so they transfer across seeds; exact theorems keep
/// arithmetic-slack bounds.
pub fn calibrate(n: usize, trials: usize, seed: u64) -> Result<Calibration, DriverError> {
    let mut loose = Calibration::default();
    for name in [
        "noise_norm",
        "row_noise",
        "davis_kahan",
        "leave_one_out",
        "normalized_noise",
        "weyl",
        "spectrum_pairing",
        "interlacing",
    ] {
        loose.set(
            name,
            CalibrationEntry {
                constant: f64::INFINITY,
                pilot_seed: seed,
                pilot_trials: trials,
            },
        );
    }
    let settings = ValidateSettings::new(n, trials, seed);
    let results = validate_suite(&settings, &loose)?;

    let mut cal = Calibration::default();
    for r in &results {
        let constant = match r.name.as_str() {
            "noise_norm" | "row_noise" => 3.0,
            "davis_kahan" => 2.0,
            "weyl" | "interlacing" => 1.000001,
            "spectrum_pairing" => 1e-9,
            _ => round_up_2(r.observed_max_ratio * 2.0),
        };
        if matches!(r.name.as_str(), "noise_norm" | "row_noise") && r.observed_max_ratio > 3.0 {
            return Err(DriverError::Message(format!(
                "pilot exceeded the frozen constant for {}: {}",
                r.name, r.observed_max_ratio
            )));
        }
        if r.name == "davis_kahan" && r.observed_max_ratio > 2.0 {
            return Err(DriverError::Message(format!(
                "pilot exceeded the frozen constant for davis_kahan: {}",
                r.observed_max_ratio
            )));
        }
        cal.set(
            &r.name,
            CalibrationEntry {
                constant,
                pilot_seed: seed,
                pilot_trials: trials,
            },
        );
    }
    Ok(cal)
}

fn round_up_2(v: f64) -> f64 {
    (v * 100.0).ceil() / 100.0
}

/// Run the pilot and write `calibration.txt`; also returns the observed
/// ratios for reporting.
pub fn calibrate_to_dir(
    n: usize,
    trials: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Calibration, DriverError> {
    fs::create_dir_all(out_dir)?;
    let cal = calibrate(n, trials, seed)?;
    fs::write(out_dir.join("calibration.txt"), cal.to_text())?;
    Ok(cal)
}

// ---------------------------------------------------------------------------
// Demo
// ---------------------------------------------------------------------------

/// Noiseless smoke test: rank 10 items from a clean comparison matrix and
/// report the recovered permutations.
pub fn demo() -> Result<String, DriverError> {
    let gt = make_ground_truth(GroundTruthKind::UniformGrid, 10, 1.0, 1.0, 1)?;
    let params = EroParams::new(10, 1.0, 1.0, 1)?;
    let (cm, _) = crate::ero::sample_comparisons(&gt, &params)?;
    let mut out = String::new();
    for method in [Method::Unnormalized, Method::Normalized] {
        let est = match method {
            Method::Unnormalized => rank_unnormalized(&cm, 1e-10, 0),
            Method::Normalized => rank_normalized(&cm, 1e-10, 0),
        }
        .map_err(|e| DriverError::Message(e.to_string()))?;
        out.push_str(&format!(
            "{method}: permutation {:?} (eigenvalue {:.6}, {} iterations)\n",
            est.permutation, est.eigen.value, est.eigen.iterations
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_recovers_identity_or_reversal() {
        let text = demo().unwrap();
        let identity = format!("{:?}", (1..=10).collect::<Vec<usize>>());
        let reversal = format!("{:?}", (1..=10).rev().collect::<Vec<usize>>());
        for line in text.lines() {
            assert!(
                line.contains(&identity) || line.contains(&reversal),
                "unexpected demo line: {line}"
            );
        }
    }

    #[test]
    fn validate_suite_runs_at_small_scale() {
        let cal = Calibration::embedded_default();
        let settings = ValidateSettings::new(140, 3, 5);
        let results = validate_suite(&settings, &cal).unwrap();
        assert_eq!(results.len(), 8);
        for r in &results {
            assert!(r.passed, "{} failed: ratio {}", r.name, r.observed_max_ratio);
        }
    }

    #[test]
    fn params_for_snr_hits_target_when_feasible() {
        let gt = uniform_gt(500, 0).unwrap();
        let pr = params_for_snr(&gt, 2.0, 0);
        let achieved = snr(&gt, &pr);
        assert!((achieved - 2.0).abs() < 0.05, "achieved {achieved}");
    }
}
