//! Pinned leave-one-out and row-noise example regimes, frozen from pilot
//! runs at the stated seeds.

use specrank_core::ero::{make_ground_truth, EroParams, GroundTruthKind};
use specrank_core::population::{population_spectrum, snr};
use specrank_core::validation::{check_row_noise_with, leave_one_out_distances};

fn eta_for(n: usize, p: f64, target: f64) -> f64 {
    let gt = make_ground_truth(GroundTruthKind::UniformGrid, n, 1.0, 1.0, 0).unwrap();
    target / snr(&gt, &EroParams::new(n, p, 1.0, 0).unwrap())
}

#[test]
fn leave_one_out_distances_stay_small_in_regime() {
    // n = 300 at SNR = 2: each leave-one-out eigenvector stays within 0.2
    // of the full one (after optimal phase alignment), trial by trial
    let n = 300;
    let p = 1.0;
    let eta = eta_for(n, p, 2.0);
    let gt = make_ground_truth(GroundTruthKind::UniformGrid, n, 1.0, 1.0, 0).unwrap();
    for trial in 0..10u64 {
        let params = EroParams::new(n, p, eta, 4000 + trial).unwrap();
        let d = leave_one_out_distances(&gt, &params, &[0, 149, 299]).unwrap();
        for (k, dist) in d.iter().enumerate() {
            assert!(*dist < 0.2, "trial {trial} index {k}: distance {dist}");
        }
    }
}

#[test]
fn leave_one_out_distances_concentrate_across_indices() {
    // one instance, every index: max/median < 5
    let n = 100;
    let p = 0.8;
    let eta = eta_for(n, p, 1.2);
    let gt = make_ground_truth(GroundTruthKind::UniformGrid, n, 1.0, 1.0, 0).unwrap();
    let params = EroParams::new(n, p, eta, 4711).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let mut d = leave_one_out_distances(&gt, &params, &all).unwrap();
    d.sort_by(f64::total_cmp);
    let median = d[n / 2];
    let max = d[n - 1];
    assert!(
        max / median < 5.0,
        "max {max:.4} / median {median:.4} = {:.2}",
        max / median
    );
}

#[test]
fn row_noise_bound_holds_for_the_population_eigenvector_direction() {
    // w = Re(phi_bar): a fixed deterministic vector independent of the noise
    let n = 500;
    let gt = make_ground_truth(GroundTruthKind::UniformGrid, n, 1.0, 1.0, 0).unwrap();
    let params = EroParams::new(n, 0.5, 0.7, 909).unwrap();
    let spec = population_spectrum(&gt, &params).unwrap();
    let result = check_row_noise_with(&gt, &params, &spec.x_bar_unnorm, 20, 3.0);
    assert!(result.passed, "ratio {}", result.observed_max_ratio);
}
