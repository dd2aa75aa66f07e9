//! Monte-Carlo sweep over (n, eta, p): sample instances, run the configured
//! ranking methods, measure errors against the population references, and
//! aggregate.
//!
//! Reproducibility contract: every random stream is derived from the master
//! seed and the grid indices, trials are written back in a fixed order
//! regardless of scheduling, and `records.csv` is byte-identical across runs
//! with the same config and seed. Wall-clock timings are kept out of the CSV
//! for that reason (the column is always 0) and reported on stderr instead.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::ero::{make_ground_truth, sample_comparisons, EroParams, GroundTruth, GroundTruthKind};
use crate::metrics::{displacement, relative_linf_error};
use crate::population::{population_spectrum, PopulationSpectrum};
use crate::ranking::{
    align_sign, rank_normalized_seeded, rank_unnormalized_seeded, rank_vector, Method,
};
use crate::rng::{self, purpose};

use super::config::ExperimentConfig;
use super::DriverError;

/// One (instance, method) outcome. Metric fields are `None` when the solver
/// failed; the failure is recorded in `error`.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub n: usize,
    pub p: f64,
    pub eta: f64,
    pub trial: usize,
    pub method: Method,
    pub snr: f64,
    pub rel_linf: Option<f64>,
    pub rho_max: Option<f64>,
    pub rho_mean: Option<f64>,
    pub sigma_top: Option<f64>,
    pub residual: Option<f64>,
    pub sign: Option<i8>,
    pub wall_ms: u64,
    pub error: Option<String>,
}

pub const RECORDS_HEADER: &str =
    "n,p,eta,trial,method,snr,rel_linf,rho_max,rho_mean,sigma_top,residual,sign,wall_ms,error";

/// Per-entry signed errors of the unnormalized score against the population
/// reference, across the trials of one grid cell; feeds the error-bar plot.
#[derive(Debug, Clone)]
pub struct ErrorBarData {
    pub n: usize,
    pub eta: f64,
    pub p: f64,
    pub snr: f64,
    /// Population reference `x_bar` (real part of the expected eigenvector).
    pub reference: Vec<f64>,
    /// One row per trial: `x - s_hat * x_bar` entries.
    pub errors: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub errorbars: Vec<ErrorBarData>,
    pub wall_ms_total: u64,
}

struct CellContext {
    n_ix: usize,
    eta_ix: usize,
    p_ix: usize,
    n: usize,
    eta: f64,
    p: f64,
    gt: GroundTruth,
    pop: PopulationSpectrum,
    ref_norm_scores: Vec<f64>,
    perm_unnorm: Vec<usize>,
    perm_norm: Vec<usize>,
    collect_errors: bool,
}

fn build_cells(cfg: &ExperimentConfig) -> Result<Vec<CellContext>, DriverError> {
    let mut cells = Vec::new();
    for (n_ix, &n) in cfg.n_list.iter().enumerate() {
        let gt = match cfg.kind {
            GroundTruthKind::UniformGrid => {
                make_ground_truth(cfg.kind, n, 1.0, 1.0, cfg.master_seed)?
            }
            GroundTruthKind::SortedGamma => make_ground_truth(
                cfg.kind,
                n,
                cfg.gamma_shape,
                cfg.gamma_scale,
                cfg.master_seed,
            )?,
            GroundTruthKind::Custom => {
                return Err(DriverError::Message(
                    "custom ground truth is not available from config files".into(),
                ))
            }
        };
        for (eta_ix, &eta) in cfg.eta_list.iter().enumerate() {
            for (p_ix, &p) in cfg.p_list.iter().enumerate() {
                let params = EroParams::new(n, p, eta, 0)?;
                let pop = population_spectrum(&gt, &params)?;
                // Dbar * x_bar_norm is the normalized method's reference
                let ref_norm_scores: Vec<f64> = pop
                    .x_bar_norm
                    .iter()
                    .zip(pop.d_bar.iter())
                    .map(|(x, d)| x * d)
                    .collect();
                let perm_unnorm = rank_vector(&pop.x_bar_unnorm);
                let perm_norm = rank_vector(&ref_norm_scores);
                let collect_errors = cfg.emit_plots
                    && n <= 500
                    && cfg.methods.contains(&Method::Unnormalized);
                cells.push(CellContext {
                    n_ix,
                    eta_ix,
                    p_ix,
                    n,
                    eta,
                    p,
                    gt: gt.clone(),
                    pop,
                    ref_norm_scores,
                    perm_unnorm,
                    perm_norm,
                    collect_errors,
                });
            }
        }
    }
    Ok(cells)
}

struct TaskOut {
    records: Vec<TrialRecord>,
    unnorm_error: Option<Vec<f64>>,
}

fn run_task(cfg: &ExperimentConfig, cell: &CellContext, trial: usize) -> TaskOut {
    let seed = rng::stream_seed(
        cfg.master_seed,
        purpose::TRIAL,
        &[
            cell.n_ix as u64,
            cell.eta_ix as u64,
            cell.p_ix as u64,
            trial as u64,
        ],
    );
    let params = EroParams {
        n: cell.n,
        p: cell.p,
        eta: cell.eta,
        seed,
    };
    let started = Instant::now();
    let (cm, _) = sample_comparisons(&cell.gt, &params).expect("validated grid parameters");

    let mut records = Vec::with_capacity(cfg.methods.len());
    let mut unnorm_error = None;

    for &method in &cfg.methods {
        let base = TrialRecord {
            n: cell.n,
            p: cell.p,
            eta: cell.eta,
            trial,
            method,
            snr: cell.pop.snr,
            rel_linf: None,
            rho_max: None,
            rho_mean: None,
            sigma_top: None,
            residual: None,
            sign: None,
            wall_ms: 0,
            error: None,
        };
        let solve = match method {
            Method::Unnormalized => {
                rank_unnormalized_seeded(&cm, cfg.tol, cfg.max_iter, Some(seed ^ 0xe1))
            }
            Method::Normalized => {
                rank_normalized_seeded(&cm, cfg.tol, cfg.max_iter, Some(seed ^ 0xe2))
            }
        };
        let record = match solve {
            Err(e) => TrialRecord {
                error: Some(e.to_string().replace(',', ";")),
                ..base
            },
            Ok(est) => {
                let (reference, ref_perm) = match method {
                    Method::Unnormalized => (&cell.pop.x_bar_unnorm, &cell.perm_unnorm),
                    Method::Normalized => (&cell.ref_norm_scores, &cell.perm_norm),
                };
                let est = align_sign(est, reference);
                let rel = relative_linf_error(&est.score, reference)
                    .expect("nonzero score and reference");
                let rep = displacement(ref_perm, &est.permutation)
                    .expect("rank vectors are permutations");
                if method == Method::Unnormalized && cell.collect_errors {
                    unnorm_error = Some(
                        est.score
                            .iter()
                            .zip(reference.iter())
                            .map(|(s, r)| s - r)
                            .collect(),
                    );
                }
                TrialRecord {
                    rel_linf: Some(rel),
                    rho_max: Some(rep.max),
                    rho_mean: Some(rep.mean),
                    sigma_top: Some(est.eigen.value),
                    residual: Some(est.eigen.residual),
                    sign: Some(est.sign_used),
                    wall_ms: started.elapsed().as_millis() as u64,
                    ..base
                }
            }
        };
        records.push(record);
    }
    TaskOut {
        records,
        unnorm_error,
    }
}

/// Run the full sweep. Trials execute on a worker pool; outputs are ordered
/// by (n, eta, p, trial, method) as listed in the config.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, DriverError> {
    cfg.validate()?;
    let cells = build_cells(cfg)?;
    let started = Instant::now();

    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(cell_ix, _)| (0..cfg.trials).map(move |t| (cell_ix, t)))
        .collect();

    let workers = if cfg.workers == 0 {
        std::thread::available_parallelism().map_or(1, |v| v.get())
    } else {
        cfg.workers
    };

    let next = AtomicUsize::new(0);
    let outputs: Mutex<Vec<Option<TaskOut>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers.min(tasks.len().max(1)) {
            scope.spawn(|| loop {
                let ix = next.fetch_add(1, Ordering::Relaxed);
                if ix >= tasks.len() {
                    break;
                }
                let (cell_ix, trial) = tasks[ix];
                let out = run_task(cfg, &cells[cell_ix], trial);
                outputs.lock().expect("worker poisoned the lock")[ix] = Some(out);
            });
        }
    });

    let outputs = outputs.into_inner().expect("workers finished");
    let mut records = Vec::with_capacity(tasks.len() * cfg.methods.len());
    let mut error_rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); cells.len()];
    for (ix, out) in outputs.into_iter().enumerate() {
        let out = out.expect("all tasks ran");
        let (cell_ix, _) = tasks[ix];
        records.extend(out.records);
        if let Some(err) = out.unnorm_error {
            error_rows[cell_ix].push(err);
        }
    }

    let errorbars = cells
        .iter()
        .zip(error_rows)
        .filter(|(cell, rows)| cell.collect_errors && !rows.is_empty())
        .map(|(cell, rows)| ErrorBarData {
            n: cell.n,
            eta: cell.eta,
            p: cell.p,
            snr: cell.pop.snr,
            reference: cell.pop.x_bar_unnorm.clone(),
            errors: rows,
        })
        .collect();

    Ok(SweepOutput {
        records,
        errorbars,
        wall_ms_total: started.elapsed().as_millis() as u64,
    })
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Mean/stddev summary for one (n, eta, p, method) group.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub n: usize,
    pub p: f64,
    pub eta: f64,
    pub method: Method,
    pub count: usize,
    pub failures: usize,
    pub snr: f64,
    pub rel_linf_mean: Option<f64>,
    pub rel_linf_std: Option<f64>,
    pub rho_max_mean: Option<f64>,
    pub rho_max_std: Option<f64>,
    pub rho_mean_mean: Option<f64>,
    pub rho_mean_std: Option<f64>,
}

pub const SUMMARY_HEADER: &str = "n,p,eta,method,count,failures,snr,rel_linf_mean,rel_linf_std,\
rho_max_mean,rho_max_std,rho_mean_mean,rho_mean_std";

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

/// Aggregate records by (n, eta, p, method) in first-appearance order.
/// Groups whose every trial failed keep their failure count but carry empty
/// statistics; a warning is printed for them.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, f64, f64, Method)> = Vec::new();
    let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
    for rec in records {
        let key = (rec.n, rec.eta, rec.p, rec.method);
        match order.iter().position(|&k| k == key) {
            Some(ix) => groups[ix].push(rec),
            None => {
                order.push(key);
                groups.push(vec![rec]);
            }
        }
    }

    order
        .iter()
        .zip(groups.iter())
        .map(|(&(n, eta, p, method), group)| {
            let ok: Vec<&&TrialRecord> = group.iter().filter(|r| r.error.is_none()).collect();
            let failures = group.len() - ok.len();
            let snr = group[0].snr;
            if ok.is_empty() {
                eprintln!(
                    "warning: group n={n} eta={eta} p={p} method={method} has no successful trials"
                );
                return SummaryRow {
                    n,
                    p,
                    eta,
                    method,
                    count: 0,
                    failures,
                    snr,
                    rel_linf_mean: None,
                    rel_linf_std: None,
                    rho_max_mean: None,
                    rho_max_std: None,
                    rho_mean_mean: None,
                    rho_mean_std: None,
                };
            }
            let collect = |f: fn(&TrialRecord) -> Option<f64>| -> Vec<f64> {
                ok.iter().filter_map(|r| f(r)).collect()
            };
            let (rel_mean, rel_std) = mean_std(&collect(|r| r.rel_linf));
            let (rmax_mean, rmax_std) = mean_std(&collect(|r| r.rho_max));
            let (rmean_mean, rmean_std) = mean_std(&collect(|r| r.rho_mean));
            SummaryRow {
                n,
                p,
                eta,
                method,
                count: ok.len(),
                failures,
                snr,
                rel_linf_mean: Some(rel_mean),
                rel_linf_std: Some(rel_std),
                rho_max_mean: Some(rmax_mean),
                rho_max_std: Some(rmax_std),
                rho_mean_mean: Some(rmean_mean),
                rho_mean_std: Some(rmean_std),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

pub fn write_records_csv<W: Write>(w: &mut W, records: &[TrialRecord]) -> std::io::Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.p,
            r.eta,
            r.trial,
            r.method,
            r.snr,
            opt(r.rel_linf),
            opt(r.rho_max),
            opt(r.rho_mean),
            opt(r.sigma_top),
            opt(r.residual),
            r.sign.map_or(String::new(), |s| s.to_string()),
            // wall-clock time would break byte-identical reruns; stderr has it
            0,
            r.error.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(w: &mut W, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.p,
            r.eta,
            r.method,
            r.count,
            r.failures,
            r.snr,
            opt(r.rel_linf_mean),
            opt(r.rel_linf_std),
            opt(r.rho_max_mean),
            opt(r.rho_max_std),
            opt(r.rho_mean_mean),
            opt(r.rho_mean_std),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            n_list: vec![10],
            eta_list: vec![1.0],
            p_list: vec![1.0],
            trials: 1,
            workers: 1,
            emit_plots: false,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noiseless_sweep_row_is_clean() {
        let out = run_sweep(&tiny_config()).unwrap();
        assert_eq!(out.records.len(), 2); // two methods
        for rec in &out.records {
            assert!(rec.error.is_none());
            assert!(rec.rel_linf.unwrap() < 1e-8, "rel {}", rec.rel_linf.unwrap());
            assert_eq!(rec.rho_max.unwrap(), 0.0);
        }
    }

    #[test]
    fn record_count_matches_grid_arithmetic() {
        let cfg = ExperimentConfig {
            n_list: vec![12],
            eta_list: vec![0.6, 1.0],
            p_list: vec![0.5, 0.75, 1.0],
            trials: 3,
            workers: 2,
            emit_plots: false,
            ..ExperimentConfig::default()
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 3 * 2 * 3); // eta * p * methods * trials
    }

    #[test]
    fn sweep_is_deterministic_across_worker_counts() {
        let mut cfg = ExperimentConfig {
            n_list: vec![16],
            eta_list: vec![0.7],
            p_list: vec![0.6],
            trials: 4,
            emit_plots: false,
            ..ExperimentConfig::default()
        };
        cfg.workers = 1;
        let a = run_sweep(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_sweep(&cfg).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_records_csv(&mut csv_a, &a.records).unwrap();
        write_records_csv(&mut csv_b, &b.records).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn solver_failures_become_error_rows_without_aborting() {
        let cfg = ExperimentConfig {
            n_list: vec![40],
            eta_list: vec![0.5],
            p_list: vec![0.5],
            trials: 2,
            workers: 1,
            emit_plots: false,
            tol: 1e-14,
            max_iter: 1, // guaranteed NoConvergence on noisy instances
            ..ExperimentConfig::default()
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 4);
        for rec in &out.records {
            assert!(rec.error.is_some());
            assert!(rec.rel_linf.is_none());
        }
        let mut csv = Vec::new();
        write_records_csv(&mut csv, &out.records).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.contains("no convergence"));
        let rows = aggregate(&out.records);
        assert!(rows.iter().all(|r| r.failures == 2 && r.count == 0));
    }

    #[test]
    fn aggregate_hand_example() {
        let mk = |rel: f64| TrialRecord {
            n: 5,
            p: 1.0,
            eta: 1.0,
            trial: 0,
            method: Method::Unnormalized,
            snr: 1.0,
            rel_linf: Some(rel),
            rho_max: Some(0.0),
            rho_mean: Some(0.0),
            sigma_top: Some(1.0),
            residual: Some(0.0),
            sign: Some(1),
            wall_ms: 0,
            error: None,
        };
        let single = aggregate(&[mk(0.3)]);
        assert_eq!(single[0].rel_linf_mean, Some(0.3));
        assert_eq!(single[0].rel_linf_std, Some(0.0));

        let rows = aggregate(&[mk(0.2), mk(0.4)]);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].rel_linf_mean.unwrap() - 0.3).abs() < 1e-15);
        assert!((rows[0].rel_linf_std.unwrap() - 0.1414).abs() < 1e-3);

        let failed = TrialRecord {
            rel_linf: None,
            error: Some("solver exploded".into()),
            ..mk(0.0)
        };
        let rows = aggregate(&[failed]);
        assert_eq!(rows[0].count, 0);
        assert_eq!(rows[0].failures, 1);
        assert_eq!(rows[0].rel_linf_mean, None);
    }

    #[test]
    fn csv_header_is_stable() {
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.trim_end(),
            "n,p,eta,trial,method,snr,rel_linf,rho_max,rho_mean,sigma_top,residual,sign,wall_ms,error"
        );
    }
}
