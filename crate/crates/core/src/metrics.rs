//! Distances between score vectors and between permutations.
//!
//! - [`relative_linf_error`]: scale- and sign-invariant entrywise distance
//!   `R(x, y) = min_{s = +-1} ||(||y||/||x||) x - s y||_inf / ||y||_inf`.
//! - [`displacement`]: per-item fraction of pairwise order disagreements
//!   between two permutations, with its max and mean.
//! - [`kemeny_mismatch`]: the total sign mismatch objective evaluated at a
//!   score vector (a diagnostic; no optimization is performed).

use thiserror::Error;

use crate::ero::ComparisonMatrix;
use crate::mat::norm2;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input is not a permutation of 1..={0}")]
    NotAPermutation(usize),
}

/// Per-item displacement fractions with their maximum and mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementReport {
    /// `rho_i`: fraction of other items whose pairwise order relative to
    /// item i disagrees between the two permutations; in [0, 1].
    pub per_item: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

/// Relative `l_inf` error between two nonzero vectors.
pub fn relative_linf_error(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    let nx = norm2(x);
    let ny = norm2(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(MetricError::ZeroVector);
    }
    let scale = ny / nx;
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    let mut y_inf = 0.0f64;
    for (xi, yi) in x.iter().zip(y.iter()) {
        let s = scale * xi;
        plus = plus.max((s - yi).abs());
        minus = minus.max((s + yi).abs());
        y_inf = y_inf.max(yi.abs());
    }
    Ok(plus.min(minus) / y_inf)
}

fn check_permutation(p: &[usize]) -> Result<(), MetricError> {
    let n = p.len();
    let mut seen = vec![false; n + 1];
    for &v in p {
        if v < 1 || v > n || seen[v] {
            return Err(MetricError::NotAPermutation(n));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Per-item displacement between two rank vectors (1-based ranks).
///
/// Computed by the definitional O(n^2) pair scan; at the target scale
/// (n <= 5000) that is at most 25M comparisons.
pub fn displacement(pi1: &[usize], pi2: &[usize]) -> Result<DisplacementReport, MetricError> {
    let n = pi1.len();
    if n != pi2.len() {
        return Err(MetricError::LengthMismatch(n, pi2.len()));
    }
    if n < 2 {
        return Err(MetricError::NotAPermutation(n));
    }
    check_permutation(pi1)?;
    check_permutation(pi2)?;

    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = pi1[i].cmp(&pi1[j]);
            let b = pi2[i].cmp(&pi2[j]);
            if a != b {
                counts[i] += 1;
                counts[j] += 1;
            }
        }
    }
    let denom = (n - 1) as f64;
    let per_item: Vec<f64> = counts.iter().map(|&c| c as f64 / denom).collect();
    let max = per_item.iter().cloned().fold(0.0, f64::max);
    let mean = per_item.iter().sum::<f64>() / n as f64;
    Ok(DisplacementReport {
        per_item,
        max,
        mean,
    })
}

/// Number of discordant pairs between two rank vectors, via an
/// O(n log n) inversion count (merge sort). Satisfies
/// `sum_i rho_i * (n-1) = 2 * discordant`.
pub fn discordant_pairs(pi1: &[usize], pi2: &[usize]) -> Result<u64, MetricError> {
    let n = pi1.len();
    if n != pi2.len() {
        return Err(MetricError::LengthMismatch(n, pi2.len()));
    }
    check_permutation(pi1)?;
    check_permutation(pi2)?;

    // order items by pi1 rank, then count inversions in the pi2 sequence
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| pi1[i]);
    let mut seq: Vec<usize> = order.iter().map(|&i| pi2[i]).collect();
    let mut buf = vec![0usize; n];
    Ok(count_inversions(&mut seq, &mut buf))
}

fn count_inversions(seq: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = seq.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = seq.split_at_mut(mid);
    let mut inv = count_inversions(left, buf) + count_inversions(right, buf);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            buf[k] = left[i];
            i += 1;
        } else {
            buf[k] = right[j];
            inv += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    seq.copy_from_slice(&buf[..n]);
    inv
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Total mismatch objective `sum_{(i,j): H_ij != 0} |sign(s_i - s_j) - sign(H_ij)|`
/// over ordered pairs. Ties in the score contribute 1 per direction.
pub fn kemeny_mismatch(score: &[f64], h: &ComparisonMatrix) -> u64 {
    let n = h.n();
    assert_eq!(score.len(), n);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let hij = h.entries.get(i, j);
            if hij != 0.0 {
                total += (sign(score[i] - score[j]) - sign(hij)).abs();
            }
        }
    }
    total as u64
}
