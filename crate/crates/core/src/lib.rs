//! Spectral recovery of global rankings from noisy pairwise score comparisons.
//!
//! Items carry hidden scores `r_1..r_n`. Each pair `(i, j)` is observed with
//! probability `p`; an observed comparison is the clean difference `r_i - r_j`
//! with probability `eta` and a uniform outlier on `[-M, M]` otherwise. The
//! resulting data matrix `H` is anti-symmetric, and the top eigenvector of
//! `iH` (or of the degree-normalized `iD^{-1}H`) recovers the scores up to a
//! global rotation and sign.
//!
//! Crate layout:
//! - [`ero`]: ground-truth generation and sampling of the comparison matrix,
//!   with its exact signal/noise decomposition.
//! - [`population`]: closed-form spectral structure of the expected matrices
//!   (used as ground truth when measuring estimation error).
//! - [`eigen`]: power-iteration top eigenpair solvers plus a dense Jacobi
//!   oracle for small matrices.
//! - [`ranking`]: the unnormalized and normalized spectral ranking algorithms
//!   (rotation disambiguation, score extraction, permutation induction).
//! - [`metrics`]: relative `l_inf` error, per-item displacement, Kemeny-style
//!   mismatch counts.
//! - [`validation`]: empirical checks of the concentration bounds and
//!   leave-one-out diagnostics that justify the algorithms.
//! - [`experiment`]: Monte-Carlo sweep driver, CSV persistence, SVG plots.

pub mod ero;
pub mod experiment;
pub mod io;
pub mod mat;
pub mod metrics;
pub mod population;
pub mod ranking;
pub mod rng;
pub mod validation;

pub mod eigen;

pub use ero::{ComparisonMatrix, EroParams, GroundTruth, GroundTruthKind, NoiseDecomposition};
pub use eigen::EigenPair;
pub use metrics::DisplacementReport;
pub use population::PopulationSpectrum;
pub use ranking::{Method, SpectralEstimate};
