//! Sweep-level behavior: error-bar whisker uniformity on the uniform grid
//! and the monotone error-vs-SNR trend.

use specrank_core::ero::{make_ground_truth, EroParams, GroundTruthKind};
use specrank_core::experiment::{aggregate, run_sweep, ExperimentConfig};
use specrank_core::population::snr;
use specrank_core::ranking::Method;

fn eta_for(n: usize, p: f64, target: f64) -> f64 {
    let gt = make_ground_truth(GroundTruthKind::UniformGrid, n, 1.0, 1.0, 0).unwrap();
    target / snr(&gt, &EroParams::new(n, p, 1.0, 0).unwrap())
}

#[test]
fn errorbar_widths_are_even_across_entries() {
    // uniform scores at n = 200, SNR = 0.5, 25 trials: the entrywise error
    // band has no hot spots (max half-width under 3x the median)
    let n = 200;
    let p = 0.5;
    let cfg = ExperimentConfig {
        n_list: vec![n],
        eta_list: vec![eta_for(n, p, 0.5)],
        p_list: vec![p],
        trials: 25,
        methods: vec![Method::Unnormalized],
        master_seed: 19,
        emit_plots: true, // error bars are collected for n <= 500
        tol: 1e-8,
        ..ExperimentConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.errorbars.len(), 1);
    let data = &out.errorbars[0];
    assert_eq!(data.errors.len(), 25);

    let mut half_widths: Vec<f64> = (0..n)
        .map(|i| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for trial in &data.errors {
                lo = lo.min(trial[i]);
                hi = hi.max(trial[i]);
            }
            (hi - lo) / 2.0
        })
        .collect();
    half_widths.sort_by(f64::total_cmp);
    let median = half_widths[n / 2];
    let max = half_widths[n - 1];
    assert!(
        max / median < 3.0,
        "max half-width {max:.5} vs median {median:.5} (ratio {:.2})",
        max / median
    );
}

#[test]
fn mean_error_is_monotone_in_snr() {
    // along a fixed-n slice, mean rel_linf may not rise with SNR (one
    // inversion allowed for Monte-Carlo noise)
    let n = 300;
    let p = 0.8;
    let targets = [0.5, 0.8, 1.2, 1.7];
    let cfg = ExperimentConfig {
        n_list: vec![n],
        eta_list: targets.iter().map(|&t| eta_for(n, p, t)).collect(),
        p_list: vec![p],
        trials: 15,
        methods: vec![Method::Unnormalized],
        master_seed: 23,
        emit_plots: false,
        tol: 1e-8,
        ..ExperimentConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    let mut rows = aggregate(&out.records);
    rows.sort_by(|a, b| a.snr.total_cmp(&b.snr));
    let means: Vec<f64> = rows.iter().map(|r| r.rel_linf_mean.unwrap()).collect();
    let inversions = means.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "means not monotone: {means:?}");
}
