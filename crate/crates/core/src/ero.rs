//! The observation model: hidden scores, sampled comparison matrices, and the
//! exact signal/noise decomposition `H = Hbar + Delta`.
//!
//! For items `i < j`, independently:
//!   - with probability `eta * p` the entry is the clean difference `r_i - r_j`,
//!   - with probability `(1 - eta) * p` it is an outlier `Z_ij ~ U[-M, M]`,
//!   - otherwise the pair is unobserved and the entry is zero.
//!
//! The lower triangle mirrors the upper with negation, so `H` is
//! anti-symmetric by construction. The expectation `Hbar = eta*p*(r 1^T - 1 r^T)`
//! has rank 2; everything else is noise.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat::DenseMat;
use crate::rng::{self, purpose};

#[derive(Debug, Error)]
pub enum EroError {
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("observation probability p must lie in (0, 1], got {0}")]
    InvalidP(f64),
    #[error("clean-observation probability eta must lie in (0, 1], got {0}")]
    InvalidEta(f64),
    #[error("gamma parameters must be positive, got shape {shape}, scale {scale}")]
    InvalidGamma { shape: f64, scale: f64 },
    #[error("custom ground truth must be built from explicit scores")]
    CustomNeedsScores,
}

/// How the hidden score vector was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundTruthKind {
    /// `r_k = k` for `k = 1..n`, bound `M = n`.
    UniformGrid,
    /// n i.i.d. Gamma draws sorted ascending, bound `M = max_i r_i`.
    SortedGamma,
    /// Caller-supplied scores.
    Custom,
}

/// The hidden score vector together with its uniform bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scores: Vec<f64>,
    /// Uniform bound: every score lies in [-M, M]; outliers are drawn from
    /// U[-M, M].
    pub bound: f64,
    pub kind: GroundTruthKind,
}

impl GroundTruth {
    pub fn n(&self) -> usize {
        self.scores.len()
    }

    /// Wrap caller-supplied scores; the bound is max |r_i|.
    pub fn custom(scores: Vec<f64>) -> Result<Self, EroError> {
        if scores.len() < 2 {
            return Err(EroError::TooFewItems(scores.len()));
        }
        let bound = scores.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(GroundTruth {
            scores,
            bound,
            kind: GroundTruthKind::Custom,
        })
    }
}

/// Model parameters for one sampled instance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EroParams {
    pub n: usize,
    /// Probability that a pair is observed at all.
    pub p: f64,
    /// Probability that an observed pair is clean rather than an outlier.
    pub eta: f64,
    pub seed: u64,
}

impl EroParams {
    pub fn new(n: usize, p: f64, eta: f64, seed: u64) -> Result<Self, EroError> {
        if n < 2 {
            return Err(EroError::TooFewItems(n));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(EroError::InvalidP(p));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(EroError::InvalidEta(eta));
        }
        Ok(EroParams { n, p, eta, seed })
    }
}

/// Sampled anti-symmetric comparison matrix with its degree vector
/// `D_ii = sum_j |H_ij|`.
#[derive(Debug, Clone)]
pub struct ComparisonMatrix {
    pub entries: DenseMat,
    pub degree: Vec<f64>,
}

impl ComparisonMatrix {
    /// Wrap an anti-symmetric matrix, computing the degrees.
    pub fn from_entries(entries: DenseMat) -> Self {
        debug_assert!(entries.is_antisymmetric());
        let n = entries.n();
        let degree = (0..n)
            .map(|i| entries.row(i).iter().map(|v| v.abs()).sum())
            .collect();
        ComparisonMatrix { entries, degree }
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn is_zero(&self) -> bool {
        self.degree.iter().all(|&d| d == 0.0)
    }
}

/// The sampled randomness behind one instance: `entries = signal + noise`,
/// where the masks and outlier matrix regenerate the entries through the
/// model identity `H = eta*p*S + (X.Y - eta*p*J).S + X.(J-Y).Z` with
/// `S = r 1^T - 1 r^T`.
#[derive(Debug, Clone)]
pub struct NoiseDecomposition {
    /// Rank-2 expectation `eta*p*(r 1^T - 1 r^T)`.
    pub signal: DenseMat,
    /// `H - signal`.
    pub noise: DenseMat,
    /// Observation mask (symmetric).
    pub mask_x: Vec<Vec<bool>>,
    /// Clean-vs-outlier mask (symmetric).
    pub mask_y: Vec<Vec<bool>>,
    /// Outlier draws (anti-symmetric); sampled for every pair, used only
    /// where `X = 1, Y = 0`.
    pub outliers: DenseMat,
}

/// Generate a ground-truth score vector.
///
/// `gamma_shape`/`gamma_scale` matter only for [`GroundTruthKind::SortedGamma`].
/// The sorted-gamma bound is `M = max_i r_i`, so outliers cover the realized
/// score range.
pub fn make_ground_truth(
    kind: GroundTruthKind,
    n: usize,
    gamma_shape: f64,
    gamma_scale: f64,
    seed: u64,
) -> Result<GroundTruth, EroError> {
    if n < 2 {
        return Err(EroError::TooFewItems(n));
    }
    match kind {
        GroundTruthKind::UniformGrid => Ok(GroundTruth {
            scores: (1..=n).map(|k| k as f64).collect(),
            bound: n as f64,
            kind,
        }),
        GroundTruthKind::SortedGamma => {
            if !(gamma_shape > 0.0 && gamma_scale > 0.0) {
                return Err(EroError::InvalidGamma {
                    shape: gamma_shape,
                    scale: gamma_scale,
                });
            }
            let gamma = Gamma::new(gamma_shape, gamma_scale).expect("validated parameters");
            let mut rng = rng::stream_rng(seed, purpose::GROUND_TRUTH, &[n as u64]);
            let mut scores: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
            scores.sort_by(f64::total_cmp);
            let bound = scores[n - 1];
            Ok(GroundTruth {
                scores,
                bound,
                kind,
            })
        }
        GroundTruthKind::Custom => Err(EroError::CustomNeedsScores),
    }
}

/// Sample one comparison matrix and its signal/noise decomposition.
///
/// All randomness comes from a stream derived from `params.seed`, so the
/// instance is a pure function of `(gt, params)`. Three draws are consumed
/// per pair regardless of the outcome, which keeps the stream aligned across
/// parameter changes.
pub fn sample_comparisons(
    gt: &GroundTruth,
    params: &EroParams,
) -> Result<(ComparisonMatrix, NoiseDecomposition), EroError> {
    let check = EroParams::new(params.n, params.p, params.eta, params.seed)?;
    let n = check.n;
    assert_eq!(n, gt.n(), "params.n must match ground truth length");

    let r = &gt.scores;
    let m = gt.bound;
    let ep = params.eta * params.p;

    let mut rng = rng::stream_rng(params.seed, purpose::SAMPLE, &[n as u64]);
    let mut entries = DenseMat::zeros(n);
    let mut outliers = DenseMat::zeros(n);
    let mut mask_x = vec![vec![false; n]; n];
    let mut mask_y = vec![vec![false; n]; n];

    for i in 0..n {
        for j in (i + 1)..n {
            let ux: f64 = rng.gen();
            let uy: f64 = rng.gen();
            let z = m * (2.0 * rng.gen::<f64>() - 1.0);
            let x = ux < params.p;
            let y = uy < params.eta;
            mask_x[i][j] = x;
            mask_x[j][i] = x;
            mask_y[i][j] = y;
            mask_y[j][i] = y;
            outliers.set(i, j, z);
            outliers.set(j, i, if z == 0.0 { 0.0 } else { -z });
            let h = if x {
                if y {
                    r[i] - r[j]
                } else {
                    z
                }
            } else {
                0.0
            };
            entries.set(i, j, h);
            entries.set(j, i, if h == 0.0 { 0.0 } else { -h });
        }
    }

    let signal = DenseMat::from_fn(n, |i, j| ep * (r[i] - r[j]));
    let noise = entries.sub(&signal);

    Ok((
        ComparisonMatrix::from_entries(entries),
        NoiseDecomposition {
            signal,
            noise,
            mask_x,
            mask_y,
            outliers,
        },
    ))
}

/// Expected degree vector
/// `Dbar_ii = p*eta*sum_j |r_i - r_j| + p*(1-eta)*(n-1)*M/2`.
pub fn expected_degree(gt: &GroundTruth, params: &EroParams) -> Vec<f64> {
    let n = gt.n();
    let r = &gt.scores;
    let outlier_part = params.p * (1.0 - params.eta) * (n as f64 - 1.0) * gt.bound / 2.0;
    (0..n)
        .map(|i| {
            let l1: f64 = r.iter().map(|rj| (r[i] - rj).abs()).sum();
            params.p * params.eta * l1 + outlier_part
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, p: f64, eta: f64, seed: u64) -> EroParams {
        EroParams::new(n, p, eta, seed).unwrap()
    }

    #[test]
    fn uniform_grid_is_one_to_n() {
        let gt = make_ground_truth(GroundTruthKind::UniformGrid, 5, 1.0, 1.0, 0).unwrap();
        assert_eq!(gt.scores, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(gt.bound, 5.0);

        let tiny = make_ground_truth(GroundTruthKind::UniformGrid, 2, 1.0, 1.0, 0).unwrap();
        assert_eq!(tiny.scores, vec![1.0, 2.0]);
        assert_eq!(tiny.bound, 2.0);
    }

    #[test]
    fn ground_truth_rejects_n_below_two() {
        assert!(make_ground_truth(GroundTruthKind::UniformGrid, 1, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn sorted_gamma_matches_exponential_distribution() {
        // Gamma(1,1) is Exp(1); compare the empirical CDF against it.
        let gt = make_ground_truth(GroundTruthKind::SortedGamma, 1000, 1.0, 1.0, 7).unwrap();
        assert!(gt.scores.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(gt.bound, gt.scores[999]);
        let n = gt.n() as f64;
        let mut ks: f64 = 0.0;
        for (i, &x) in gt.scores.iter().enumerate() {
            let cdf = 1.0 - (-x).exp();
            let hi = (i as f64 + 1.0) / n - cdf;
            let lo = cdf - i as f64 / n;
            ks = ks.max(hi).max(lo);
        }
        assert!(ks < 0.05, "KS statistic vs Exp(1) too large: {ks}");
    }

    #[test]
    fn noiseless_instance_is_exact_signal() {
        let gt = GroundTruth::custom(vec![1.0, 2.0, 3.0]).unwrap();
        let (cm, _) = sample_comparisons(&gt, &params(3, 1.0, 1.0, 1)).unwrap();
        assert_eq!(cm.entries.get(0, 1), -1.0);
        assert_eq!(cm.entries.get(0, 2), -2.0);
        assert_eq!(cm.entries.get(1, 2), -1.0);
        assert_eq!(cm.entries.get(2, 0), 2.0);
        assert_eq!(cm.degree, vec![3.0, 2.0, 3.0]);
    }

    #[test]
    fn p_zero_is_rejected_and_tiny_p_gives_empty_matrix() {
        let gt = GroundTruth::custom(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            sample_comparisons(&gt, &EroParams { n: 3, p: 0.0, eta: 1.0, seed: 0 }),
            Err(EroError::InvalidP(_))
        ));
        let (cm, dec) = sample_comparisons(&gt, &params(3, 1e-300, 1.0, 3)).unwrap();
        assert!(cm.is_zero());
        assert_eq!(cm.degree, vec![0.0; 3]);
        // signal + noise still reconstructs the zero matrix
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(dec.signal.get(i, j) + dec.noise.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn expected_degree_hand_cases() {
        let gt01 = GroundTruth::custom(vec![0.0, 1.0]).unwrap();
        let d = expected_degree(&gt01, &params(2, 1.0, 1.0, 0));
        assert_eq!(d, vec![1.0, 1.0]);

        let gt123 = GroundTruth::custom(vec![1.0, 2.0, 3.0]).unwrap();
        let d = expected_degree(&gt123, &params(3, 1.0, 1.0, 0));
        assert_eq!(d, vec![3.0, 2.0, 3.0]);

        // Constant scores with eta = 1: every pairwise difference vanishes.
        let gtc = GroundTruth {
            scores: vec![2.0, 2.0, 2.0],
            bound: 2.0,
            kind: GroundTruthKind::Custom,
        };
        let d = expected_degree(&gtc, &params(3, 0.37, 1.0, 0));
        assert_eq!(d, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn signal_matrix_has_rank_two() {
        let gt = make_ground_truth(GroundTruthKind::UniformGrid, 24, 1.0, 1.0, 0).unwrap();
        let (_, dec) = sample_comparisons(&gt, &params(24, 0.5, 0.5, 3)).unwrap();
        let spectrum = crate::eigen::oracle::dense_oracle_spectrum_mat(&dec.signal).unwrap();
        let top = spectrum[0];
        assert!(top > 0.0);
        for v in &spectrum[1..spectrum.len() - 1] {
            assert!(v.abs() < 1e-9 * top, "third singular value {v} vs top {top}");
        }
    }

    #[test]
    fn decomposition_reconstructs_and_masks_regenerate() {
        let gt = make_ground_truth(GroundTruthKind::UniformGrid, 40, 1.0, 1.0, 5).unwrap();
        let pr = params(40, 0.6, 0.7, 11);
        let (cm, dec) = sample_comparisons(&gt, &pr).unwrap();
        let ep = pr.eta * pr.p;
        let scale = 2.0 * gt.bound;
        for i in 0..40 {
            for j in 0..40 {
                let h = cm.entries.get(i, j);
                // noise is the defining subtraction, so the reconstruction is
                // exact up to the one rounding it performs
                let s = dec.signal.get(i, j);
                let ulp = f64::EPSILON * h.abs().max(s.abs());
                assert!(
                    (s + dec.noise.get(i, j) - h).abs() <= 2.0 * ulp,
                    "reconstruction off at ({i},{j})"
                );
                // regenerate through the model identity
                let s = gt.scores[i] - gt.scores[j];
                let x = if dec.mask_x[i][j] { 1.0 } else { 0.0 };
                let y = if dec.mask_y[i][j] { 1.0 } else { 0.0 };
                let regen = ep * s + (x * y - ep) * s + x * (1.0 - y) * dec.outliers.get(i, j);
                assert!(
                    (regen - h).abs() <= 1e-12 * scale,
                    "mask identity failed at ({i},{j}): {regen} vs {h}"
                );
            }
        }
        assert!(cm.entries.is_antisymmetric());
        assert!(dec.outliers.is_antisymmetric());
    }
}
