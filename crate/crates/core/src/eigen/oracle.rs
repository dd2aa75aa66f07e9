//! Dense spectral oracle for small matrices.
//!
//! The Hermitian `i*H` embeds into the real symmetric `2n x 2n` matrix
//! `E = [[0, -H], [H, 0]]`: an eigenvector `(x; y)` of `E` with eigenvalue
//! `mu` corresponds to the eigenvector `x + i*y` of `i*H` with the same
//! eigenvalue, and every eigenvalue of `i*H` appears in `E` with doubled
//! multiplicity. Cyclic Jacobi on `E` is unconditionally convergent, which is
//! what a test oracle needs. Guarded to n <= 64.

use crate::ero::ComparisonMatrix;
use crate::mat::{CVec, DenseMat};

use super::EigenError;

pub const ORACLE_LIMIT: usize = 64;

/// All eigenvalues of `i*H`, sorted descending.
pub fn dense_oracle_spectrum(h: &ComparisonMatrix) -> Result<Vec<f64>, EigenError> {
    dense_oracle_spectrum_mat(&h.entries)
}

/// Spectrum oracle on a bare anti-symmetric matrix (used on noise matrices).
pub fn dense_oracle_spectrum_mat(m: &DenseMat) -> Result<Vec<f64>, EigenError> {
    let (values, _) = embedded_eigen(m)?;
    // every eigenvalue of i*H appears twice in E
    Ok(values.iter().step_by(2).cloned().collect())
}

/// Exact operator norm (largest singular value) for small matrices.
pub fn dense_oracle_opnorm(m: &DenseMat) -> Result<f64, EigenError> {
    let spectrum = dense_oracle_spectrum_mat(m)?;
    Ok(spectrum.first().map_or(0.0, |v| v.abs()))
}

/// Top eigenpair of `i*H` from the dense embedding.
pub fn oracle_top_eigenpair(h: &ComparisonMatrix) -> Result<(f64, CVec), EigenError> {
    let n = h.n();
    let (values, vectors) = embedded_eigen(&h.entries)?;
    let top = vectors[0].as_slice();
    let vector = CVec::new(top[..n].to_vec(), top[n..].to_vec());
    Ok((values[0], vector))
}

/// Eigen-decomposition of the embedding, sorted descending.
/// Returns (eigenvalues, eigenvectors as rows of the outer Vec).
fn embedded_eigen(m: &DenseMat) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = m.n();
    if n > ORACLE_LIMIT {
        return Err(EigenError::TooLarge {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    debug_assert!(m.is_antisymmetric());
    let dim = 2 * n;
    let embedded = DenseMat::from_fn(dim, |i, j| {
        if i < n && j >= n {
            -m.get(i, j - n)
        } else if i >= n && j < n {
            m.get(i - n, j)
        } else {
            0.0
        }
    });
    let (values, vectors) = jacobi_eigen(&embedded);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..dim).map(|row| vectors.get(row, k)).collect())
        .collect();
    Ok((sorted_values, sorted_vectors))
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns
/// unsorted eigenvalues and the orthogonal matrix of eigenvectors (columns).
fn jacobi_eigen(sym: &DenseMat) -> (Vec<f64>, DenseMat) {
    let n = sym.n();
    let mut a = sym.clone();
    let mut v = DenseMat::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 });
    let scale = sym.frob_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if (2.0 * off).sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let values = (0..n).map(|i| a.get(i, i)).collect();
    (values, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ero::{sample_comparisons, EroParams, GroundTruth};

    fn random_instance(n: usize, seed: u64) -> ComparisonMatrix {
        let gt = GroundTruth::custom((1..=n).map(|k| k as f64).collect()).unwrap();
        let params = EroParams::new(n, 0.8, 0.6, seed).unwrap();
        sample_comparisons(&gt, &params).unwrap().0
    }

    #[test]
    fn rank_two_spectrum_in_closed_form() {
        let gt = GroundTruth::custom(vec![1.0, 2.0, 3.0]).unwrap();
        let params = EroParams::new(3, 1.0, 1.0, 0).unwrap();
        let (cm, _) = sample_comparisons(&gt, &params).unwrap();
        let spec = dense_oracle_spectrum(&cm).unwrap();
        let s6 = 6.0f64.sqrt();
        assert!((spec[0] - s6).abs() < 1e-10);
        assert!(spec[1].abs() < 1e-10);
        assert!((spec[2] + s6).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_spectrum_is_zero() {
        let cm = ComparisonMatrix::from_entries(DenseMat::zeros(5));
        let spec = dense_oracle_spectrum(&cm).unwrap();
        assert!(spec.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn spectrum_is_symmetric_about_zero() {
        for seed in [1u64, 2, 3] {
            let cm = random_instance(4, seed);
            let spec = dense_oracle_spectrum(&cm).unwrap();
            let n = spec.len();
            for k in 0..n {
                assert!(
                    (spec[k] + spec[n - 1 - k]).abs() < 1e-10,
                    "pairing failed: {:?}",
                    spec
                );
            }
        }
    }

    #[test]
    fn oracle_eigenpair_satisfies_eigen_equation() {
        let cm = random_instance(8, 13);
        let (value, vector) = oracle_top_eigenpair(&cm).unwrap();
        // i*H*(x+iy) = -H*y + i*H*x
        let n = cm.n();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        cm.entries.matvec(&vector.im, &mut re);
        cm.entries.matvec(&vector.re, &mut im);
        let mut acc = 0.0;
        for k in 0..n {
            let dre = -re[k] - value * vector.re[k];
            let dim = im[k] - value * vector.im[k];
            acc += dre * dre + dim * dim;
        }
        assert!(acc.sqrt() < 1e-10 * value.max(1.0));
        assert!((vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let cm = ComparisonMatrix::from_entries(DenseMat::zeros(65));
        assert!(matches!(
            dense_oracle_spectrum(&cm),
            Err(EigenError::TooLarge { n: 65, .. })
        ));
    }
}
