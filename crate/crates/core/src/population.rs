//! Closed-form spectral structure of the expected matrices.
//!
//! The expectation `Hbar = eta*p*(r 1^T - 1 r^T)` is rank 2, so its top
//! eigen-structure (and that of the degree-normalized variant) is available
//! in closed form. These quantities serve as the reference against which the
//! sampled estimates are measured, so they are evaluated directly rather than
//! through a numerical eigensolver.
//!
//! With `alpha` the mean score, the Hermitian `i*Hbar` has top eigenvalue
//! `sigma_bar = eta*p*sqrt(n)*||r - alpha*1||` and eigenvector
//! `phi_bar = ((r - alpha*1)/||r - alpha*1|| - i*1/sqrt(n)) / sqrt(2)`.
//! For the normalized variant, `gamma` is the `Dbar^{-1}`-weighted mean that
//! makes the two singular directions orthogonal, and the top eigenvector of
//! `i*Dbar^{-1}*Hbar` is the normalized `Dbar^{-1/2}`-image of the
//! symmetrized eigenvector.

use serde::Serialize;
use thiserror::Error;

use crate::ero::{expected_degree, EroParams, GroundTruth};
use crate::mat::{dot, norm2, CVec, DenseMat};

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("constant score vector has no spectral direction")]
    ConstantScores,
    #[error("expected degree of item {0} is zero; normalized quantities undefined")]
    ZeroExpectedDegree(usize),
}

/// Closed-form spectral quantities of the expected matrices.
#[derive(Debug, Clone)]
pub struct PopulationSpectrum {
    /// Top eigenvalue of `i*Hbar`.
    pub sigma_bar: f64,
    /// Top eigenvalue of `i*Dbar^{-1}*Hbar`.
    pub xi_bar: f64,
    /// Mean of the scores.
    pub alpha: f64,
    /// `Dbar^{-1}`-weighted mean of the scores.
    pub gamma: f64,
    /// Normalized minimum expected degree `min_i Dbar_ii / (p n M)`.
    pub lambda_param: f64,
    /// Signal-to-noise ratio `sqrt(eta^2 p n / ln n) * ||r - alpha 1|| / (sqrt(n) M)`.
    pub snr: f64,
    /// Unit top eigenvector of `i*Hbar`.
    pub phi_bar: CVec,
    /// Unit top eigenvector of `i*Dbar^{-1}*Hbar`.
    pub psi_bar: CVec,
    /// Expected degrees.
    pub d_bar: Vec<f64>,
    /// Real part of `phi_bar` (the unnormalized score reference).
    pub x_bar_unnorm: Vec<f64>,
    /// Real part of `psi_bar`; `Dbar * x_bar_norm` is proportional to
    /// `r - gamma*1`.
    pub x_bar_norm: Vec<f64>,
}

/// Residuals of the closed-form eigenpairs against explicitly assembled
/// expected matrices.
#[derive(Debug, Clone, Serialize)]
pub struct EigenpairResiduals {
    pub sigma_bar: f64,
    pub xi_bar: f64,
    /// `||i*Hbar*phi_bar - sigma_bar*phi_bar||`
    pub unnormalized: f64,
    /// `||i*Dbar^{-1}*Hbar*psi_bar - xi_bar*psi_bar||`
    pub normalized: f64,
}

impl EigenpairResiduals {
    /// Both residuals below `rel_tol` relative to their eigenvalue.
    pub fn within(&self, rel_tol: f64) -> bool {
        self.unnormalized <= rel_tol * self.sigma_bar && self.normalized <= rel_tol * self.xi_bar
    }
}

#[derive(Serialize)]
struct SpectrumSummary {
    sigma_bar: f64,
    xi_bar: f64,
    alpha: f64,
    gamma: f64,
    lambda: f64,
    snr: f64,
}

impl PopulationSpectrum {
    /// JSON summary of the scalar quantities, for experiment logs.
    pub fn to_json_summary(&self) -> String {
        serde_json::to_string(&SpectrumSummary {
            sigma_bar: self.sigma_bar,
            xi_bar: self.xi_bar,
            alpha: self.alpha,
            gamma: self.gamma,
            lambda: self.lambda_param,
            snr: self.snr,
        })
        .expect("plain floats always serialize")
    }
}

/// Signal-to-noise ratio for the given configuration.
pub fn snr(gt: &GroundTruth, params: &EroParams) -> f64 {
    let n = gt.n() as f64;
    let alpha = gt.scores.iter().sum::<f64>() / n;
    let centered: f64 = gt
        .scores
        .iter()
        .map(|r| (r - alpha) * (r - alpha))
        .sum::<f64>()
        .sqrt();
    (params.eta * params.eta * params.p * n / n.ln()).sqrt() * centered / (n.sqrt() * gt.bound)
}

/// Compute the full closed-form spectrum.
pub fn population_spectrum(
    gt: &GroundTruth,
    params: &EroParams,
) -> Result<PopulationSpectrum, PopulationError> {
    let n = gt.n();
    let nf = n as f64;
    let r = &gt.scores;
    let ep = params.eta * params.p;

    let alpha = r.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = r.iter().map(|v| v - alpha).collect();
    let centered_norm = norm2(&centered);
    if centered_norm == 0.0 {
        return Err(PopulationError::ConstantScores);
    }

    let sigma_bar = ep * nf.sqrt() * centered_norm;
    let snr_val = snr(gt, params);

    // phi_bar = (u2 + i*u1)/sqrt(2) with u2 = centered/||centered||, u1 = -1/sqrt(n)
    let s2 = 2.0f64.sqrt();
    let phi_bar = CVec::new(
        centered.iter().map(|v| v / (centered_norm * s2)).collect(),
        vec![-1.0 / (nf.sqrt() * s2); n],
    );

    let d_bar = expected_degree(gt, params);
    if let Some(i) = d_bar.iter().position(|&d| d <= 0.0) {
        return Err(PopulationError::ZeroExpectedDegree(i));
    }

    let lambda_param = d_bar.iter().cloned().fold(f64::INFINITY, f64::min)
        / (params.p * nf * gt.bound);

    // gamma makes the Dbar^{-1/2}-scaled directions orthogonal.
    let w: Vec<f64> = d_bar.iter().map(|d| 1.0 / d).collect();
    let gamma = dot(r, &w) / w.iter().sum::<f64>();

    // a = Dbar^{-1/2}(r - gamma*1), b = Dbar^{-1/2} 1
    let a: Vec<f64> = r
        .iter()
        .zip(d_bar.iter())
        .map(|(ri, di)| (ri - gamma) / di.sqrt())
        .collect();
    let b: Vec<f64> = d_bar.iter().map(|di| 1.0 / di.sqrt()).collect();
    let na = norm2(&a);
    let nb = norm2(&b);
    let xi_bar = ep * na * nb;

    // psi_bar: normalized Dbar^{-1/2}((a/na + i*(-b/nb)) / sqrt(2)).
    let psi_raw = CVec::new(
        a.iter()
            .zip(d_bar.iter())
            .map(|(ai, di)| ai / (na * di.sqrt() * s2))
            .collect(),
        b.iter()
            .zip(d_bar.iter())
            .map(|(bi, di)| -bi / (nb * di.sqrt() * s2))
            .collect(),
    );
    let psi_bar = psi_raw.normalized();

    let x_bar_unnorm = phi_bar.re.clone();
    let x_bar_norm = psi_bar.re.clone();

    Ok(PopulationSpectrum {
        sigma_bar,
        xi_bar,
        alpha,
        gamma,
        lambda_param,
        snr: snr_val,
        phi_bar,
        psi_bar,
        d_bar,
        x_bar_unnorm,
        x_bar_norm,
    })
}

/// Assemble `Hbar` explicitly and measure how well the closed-form eigenpairs
/// satisfy their eigen-equations.
pub fn verify_population_eigenpair(
    spectrum: &PopulationSpectrum,
    gt: &GroundTruth,
    params: &EroParams,
) -> EigenpairResiduals {
    let n = gt.n();
    let ep = params.eta * params.p;
    let h_bar = DenseMat::from_fn(n, |i, j| ep * (gt.scores[i] - gt.scores[j]));

    // i*A*(x + i*y) = -A*y + i*A*x for real A.
    let apply_i = |a: &DenseMat, v: &CVec, dinv: Option<&[f64]>| -> CVec {
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        a.matvec(&v.im, &mut re);
        a.matvec(&v.re, &mut im);
        for k in 0..n {
            re[k] = -re[k];
            if let Some(d) = dinv {
                re[k] *= d[k];
                im[k] *= d[k];
            }
        }
        CVec::new(re, im)
    };

    let resid = |applied: &CVec, value: f64, v: &CVec| -> f64 {
        let mut acc = 0.0;
        for k in 0..n {
            let dre = applied.re[k] - value * v.re[k];
            let dim = applied.im[k] - value * v.im[k];
            acc += dre * dre + dim * dim;
        }
        acc.sqrt()
    };

    let unnormalized = resid(
        &apply_i(&h_bar, &spectrum.phi_bar, None),
        spectrum.sigma_bar,
        &spectrum.phi_bar,
    );
    let dinv: Vec<f64> = spectrum.d_bar.iter().map(|d| 1.0 / d).collect();
    let normalized = resid(
        &apply_i(&h_bar, &spectrum.psi_bar, Some(&dinv)),
        spectrum.xi_bar,
        &spectrum.psi_bar,
    );

    EigenpairResiduals {
        sigma_bar: spectrum.sigma_bar,
        xi_bar: spectrum.xi_bar,
        unnormalized,
        normalized,
    }
}
