//! The two spectral ranking algorithms.
//!
//! Both compute a top eigenpair, fix the rotation ambiguity of the
//! eigenvector, read scores off its real part, and induce a permutation:
//!
//! - unnormalized: eigenvector `phi_1` of `i*H`, scores `Re(e^{i*theta}*phi_1)`;
//! - normalized: eigenvector `psi_1` of `i*D^{-1}*H`, scores
//!   `D * Re(e^{i*theta}*psi_1)`.
//!
//! The rotation angle makes the real part orthogonal to the all-ones vector;
//! among the two angles that achieve this, the canonical one leaves the
//! imaginary part negatively aligned with all-ones (the population
//! eigenvector has imaginary part proportional to `-1`). A global sign of the
//! scores remains fundamentally unidentifiable; [`align_sign`] resolves it
//! against a reference when ground truth is available, and is deliberately a
//! separate step from the algorithms themselves.

use serde::Serialize;

use crate::eigen::{self, EigenError, EigenPair};
use crate::ero::ComparisonMatrix;
use crate::mat::{norm2, sum, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Unnormalized,
    Normalized,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Unnormalized => "unnormalized",
            Method::Normalized => "normalized",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output of one ranking algorithm on one instance.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    pub method: Method,
    pub eigen: EigenPair,
    /// Rotation angle in (-pi, pi].
    pub theta_hat: f64,
    /// Score vector: `Re(e^{i*theta}*phi_1)`, or `D*Re(e^{i*theta}*psi_1)`.
    pub score: Vec<f64>,
    /// Rank of each item, 1-based, ascending in score; ties broken by index.
    pub permutation: Vec<usize>,
    /// Cumulative sign applied by [`align_sign`] relative to the raw
    /// algorithm output; +1 until alignment happens.
    pub sign_used: i8,
}

#[derive(Serialize)]
struct EstimateJson<'a> {
    method: Method,
    theta_hat: f64,
    eigenvalue: f64,
    score: &'a [f64],
    permutation: &'a [usize],
}

impl SpectralEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&EstimateJson {
            method: self.method,
            theta_hat: self.theta_hat,
            eigenvalue: self.eigen.value,
            score: &self.score,
            permutation: &self.permutation,
        })
        .expect("estimate serializes")
    }
}

/// Rotation angle for an eigenvector `v = re + i*im`.
///
/// Returns the angle in `(-pi, pi]` for which `<Re(e^{i*theta}v), 1> = 0`,
/// choosing between the two solutions so that `<Im(e^{i*theta}v), 1> <= 0`.
/// When both inner products are already zero the vector is canonical and the
/// angle is 0.
pub fn rotation_angle(re: &[f64], im: &[f64]) -> f64 {
    let s_re = sum(re);
    let s_im = sum(im);
    // negated zeros would push atan2 onto the wrong branch
    let y = if s_re == 0.0 { 0.0 } else { -s_re };
    let x = if s_im == 0.0 { 0.0 } else { -s_im };
    let theta = y.atan2(x);
    debug_assert!(
        {
            let branch = three_branch_angle(s_re, s_im);
            angle_distance(theta, branch) < 1e-9
        },
        "atan2 angle disagrees with the case formula"
    );
    theta
}

/// The case-split form of the rotation angle; kept as the reference
/// definition and asserted against the atan2 route in debug builds.
fn three_branch_angle(s_re: f64, s_im: f64) -> f64 {
    use std::f64::consts::PI;
    if s_im < 0.0 {
        (s_re / s_im).atan()
    } else if s_im == 0.0 {
        let sgn = if s_re > 0.0 {
            1.0
        } else if s_re < 0.0 {
            -1.0
        } else {
            0.0
        };
        -(PI / 2.0) * sgn
    } else {
        let mut t = PI + (s_re / s_im).atan();
        if t > PI {
            t -= 2.0 * PI;
        }
        t
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    use std::f64::consts::TAU;
    let mut d = (a - b) % TAU;
    if d > TAU / 2.0 {
        d -= TAU;
    }
    if d < -TAU / 2.0 {
        d += TAU;
    }
    d.abs()
}

/// Rank of each item (1-based) under ascending score; equal scores are
/// ranked by item index.
pub fn rank_vector(score: &[f64]) -> Vec<usize> {
    let n = score.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        rank[idx] = pos + 1;
    }
    rank
}

fn finish_estimate(method: Method, eigen: EigenPair, score: Vec<f64>) -> SpectralEstimate {
    let permutation = rank_vector(&score);
    let theta_hat = rotation_angle(&eigen.vector_re, &eigen.vector_im);
    SpectralEstimate {
        method,
        eigen,
        theta_hat,
        score,
        permutation,
        sign_used: 1,
    }
}

fn rotated_parts(eigen: &EigenPair, theta: f64) -> CVec {
    CVec::new(eigen.vector_re.clone(), eigen.vector_im.clone()).rotated(theta)
}

/// Unnormalized spectral ranking: rank by `Re(e^{i*theta}*phi_1)` where
/// `phi_1` is the top eigenvector of `i*H`.
pub fn rank_unnormalized(
    h: &ComparisonMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate, EigenError> {
    rank_unnormalized_seeded(h, tol, max_iter, None)
}

pub fn rank_unnormalized_seeded(
    h: &ComparisonMatrix,
    tol: f64,
    max_iter: usize,
    seed: Option<u64>,
) -> Result<SpectralEstimate, EigenError> {
    let eigen = match seed {
        Some(s) => eigen::top_eigenpair_antisym_seeded(h, tol, max_iter, s)?,
        None => eigen::top_eigenpair_antisym(h, tol, max_iter)?,
    };
    let theta = rotation_angle(&eigen.vector_re, &eigen.vector_im);
    let rotated = rotated_parts(&eigen, theta);
    debug_assert_canonical(&rotated);
    Ok(finish_estimate(Method::Unnormalized, eigen, rotated.re))
}

/// Normalized spectral ranking: rank by `D * Re(e^{i*theta}*psi_1)` where
/// `psi_1` is the top eigenvector of `i*D^{-1}*H`.
pub fn rank_normalized(
    h: &ComparisonMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate, EigenError> {
    rank_normalized_seeded(h, tol, max_iter, None)
}

pub fn rank_normalized_seeded(
    h: &ComparisonMatrix,
    tol: f64,
    max_iter: usize,
    seed: Option<u64>,
) -> Result<SpectralEstimate, EigenError> {
    let eigen = match seed {
        Some(s) => eigen::top_eigenpair_normalized_seeded(h, tol, max_iter, s)?,
        None => eigen::top_eigenpair_normalized(h, tol, max_iter)?,
    };
    let theta = rotation_angle(&eigen.vector_re, &eigen.vector_im);
    let rotated = rotated_parts(&eigen, theta);
    debug_assert_canonical(&rotated);
    let score: Vec<f64> = rotated
        .re
        .iter()
        .zip(h.degree.iter())
        .map(|(x, d)| d * x)
        .collect();
    Ok(finish_estimate(Method::Normalized, eigen, score))
}

fn debug_assert_canonical(rotated: &CVec) {
    // The rotated real part is orthogonal to all-ones and the imaginary part
    // points against it (the canonical orientation of the population
    // eigenvector, whose imaginary part is proportional to -1).
    let slack = 1e-9 * rotated.norm() * (rotated.len() as f64).sqrt();
    debug_assert!(sum(&rotated.re).abs() <= slack);
    debug_assert!(sum(&rotated.im) <= slack);
}

/// Resolve the global sign against a reference score vector, flipping the
/// estimate when that strictly reduces the sup-norm distance between the
/// unit-normalized vectors. Idempotent.
pub fn align_sign(mut estimate: SpectralEstimate, reference: &[f64]) -> SpectralEstimate {
    assert_eq!(estimate.score.len(), reference.len());
    let ns = norm2(&estimate.score);
    let nr = norm2(reference);
    if ns == 0.0 || nr == 0.0 {
        return estimate;
    }
    let mut keep = 0.0f64;
    let mut flip = 0.0f64;
    for (s, r) in estimate.score.iter().zip(reference.iter()) {
        let (su, ru) = (s / ns, r / nr);
        keep = keep.max((su - ru).abs());
        flip = flip.max((su + ru).abs());
    }
    if flip < keep {
        for s in estimate.score.iter_mut() {
            *s = -*s;
        }
        estimate.permutation = rank_vector(&estimate.score);
        estimate.sign_used = -estimate.sign_used;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ero::{make_ground_truth, sample_comparisons, EroParams, GroundTruth, GroundTruthKind};
    use crate::population::population_spectrum;
    use crate::rng::{self, purpose};
    use rand::Rng;
    use std::f64::consts::PI;

    fn noiseless(scores: Vec<f64>) -> (ComparisonMatrix, GroundTruth, EroParams) {
        let n = scores.len();
        let gt = GroundTruth::custom(scores).unwrap();
        let params = EroParams::new(n, 1.0, 1.0, 0).unwrap();
        let (cm, _) = sample_comparisons(&gt, &params).unwrap();
        (cm, gt, params)
    }

    #[test]
    fn rotation_angle_trivial_cases() {
        // already canonical: Re sums to zero, Im sums negative
        assert_eq!(rotation_angle(&[1.0, -1.0], &[-2.0, -3.0]), 0.0);
        // Im sum zero, Re sum positive -> -pi/2
        assert!((rotation_angle(&[2.0, 1.0], &[1.0, -1.0]) + PI / 2.0).abs() < 1e-15);
        // both zero -> 0
        assert_eq!(rotation_angle(&[1.0, -1.0], &[3.0, -3.0]), 0.0);
    }

    #[test]
    fn rotation_recovers_population_phase() {
        let gt = make_ground_truth(GroundTruthKind::UniformGrid, 25, 1.0, 1.0, 0).unwrap();
        let params = EroParams::new(25, 1.0, 1.0, 0).unwrap();
        let spec = population_spectrum(&gt, &params).unwrap();
        let mut rng = rng::stream_rng(17, purpose::TEST, &[1]);
        for _ in 0..100 {
            let theta0 = (rng.gen::<f64>() - 0.5) * 2.0 * PI;
            let v = spec.phi_bar.rotated(-theta0);
            let theta = rotation_angle(&v.re, &v.im);
            let canonical = v.rotated(theta);
            let slack = 1e-9 * 5.0; // ||v|| * sqrt(n)
            assert!(sum(&canonical.re).abs() < slack);
            assert!(sum(&canonical.im) < slack);
        }
    }

    #[test]
    fn noiseless_ranking_is_exact_up_to_reversal() {
        for method in [Method::Unnormalized, Method::Normalized] {
            let (cm, _, _) = noiseless((1..=10).map(|k| k as f64).collect());
            let est = match method {
                Method::Unnormalized => rank_unnormalized(&cm, 1e-10, 0).unwrap(),
                Method::Normalized => rank_normalized(&cm, 1e-10, 0).unwrap(),
            };
            let identity: Vec<usize> = (1..=10).collect();
            let reversal: Vec<usize> = (1..=10).rev().collect();
            assert!(
                est.permutation == identity || est.permutation == reversal,
                "{method}: {:?}",
                est.permutation
            );
        }
    }

    #[test]
    fn shuffled_scores_rank_correctly() {
        let (cm, _, _) = noiseless(vec![3.0, 1.0, 2.0]);
        let est = rank_unnormalized(&cm, 1e-10, 0).unwrap();
        let expect = vec![3, 1, 2];
        let reversed = vec![1, 3, 2];
        assert!(
            est.permutation == expect || est.permutation == reversed,
            "{:?}",
            est.permutation
        );
    }

    #[test]
    fn normalized_score_is_affine_in_scores_when_noiseless() {
        let (cm, gt, params) = noiseless(vec![1.0, 2.0, 3.0]);
        let spec = population_spectrum(&gt, &params).unwrap();
        let est = rank_normalized(&cm, 1e-12, 0).unwrap();
        // score should be proportional to r - gamma*1 up to sign
        let reference: Vec<f64> = gt.scores.iter().map(|r| r - spec.gamma).collect();
        let est = align_sign(est, &reference);
        let scale = norm2(&reference) / norm2(&est.score);
        for (s, r) in est.score.iter().zip(reference.iter()) {
            assert!(
                (s * scale - r).abs() < 1e-8 * norm2(&reference),
                "score {s} vs reference {r}"
            );
        }
    }

    #[test]
    fn align_sign_flips_and_is_idempotent() {
        let (cm, gt, _) = noiseless((1..=8).map(|k| k as f64).collect());
        let est = rank_unnormalized(&cm, 1e-10, 0).unwrap();

        let aligned = align_sign(est.clone(), &gt.scores);
        let flipped_ref: Vec<f64> = gt.scores.iter().map(|r| -r).collect();
        let anti = align_sign(est, &flipped_ref);
        assert_eq!(aligned.sign_used, -anti.sign_used);
        assert_eq!(aligned.permutation, (1..=8).collect::<Vec<_>>());

        let again = align_sign(aligned.clone(), &gt.scores);
        assert_eq!(again.score, aligned.score);
        assert_eq!(again.sign_used, aligned.sign_used);
        assert_eq!(again.permutation, aligned.permutation);
    }

    #[test]
    fn permutation_is_scale_invariant() {
        let gt = make_ground_truth(GroundTruthKind::UniformGrid, 50, 1.0, 1.0, 0).unwrap();
        let params = EroParams::new(50, 0.5, 0.7, 99).unwrap();
        let (cm, _) = sample_comparisons(&gt, &params).unwrap();
        let est = rank_unnormalized(&cm, 1e-10, 0).unwrap();

        let scaled = ComparisonMatrix::from_entries(crate::mat::DenseMat::from_fn(50, |i, j| {
            5.5 * cm.entries.get(i, j)
        }));
        let est_scaled = rank_unnormalized(&scaled, 1e-10, 0).unwrap();
        assert_eq!(est.permutation, est_scaled.permutation);
    }

    #[test]
    fn estimate_serializes_to_json() {
        let (cm, _, _) = noiseless(vec![1.0, 2.0, 3.0]);
        let est = rank_unnormalized(&cm, 1e-10, 0).unwrap();
        let json = est.to_json();
        for key in ["method", "theta_hat", "eigenvalue", "score", "permutation"] {
            assert!(json.contains(key), "missing {key}: {json}");
        }
    }
}
