//! Dense row-major square matrices and the small amount of real/complex
//! vector algebra the solvers need. Target scale is n <= 5000, where dense
//! storage beats any sparse format for the densities we sample.

use num_complex::Complex64;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    n: usize,
    data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(n: usize) -> Self {
        DenseMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// out = self * x
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *o = acc;
        }
    }

    pub fn is_antisymmetric(&self) -> bool {
        for i in 0..self.n {
            for j in 0..i {
                if self.get(i, j) != -self.get(j, i) {
                    return false;
                }
            }
            if self.get(i, i) != 0.0 {
                return false;
            }
        }
        true
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise difference self - other.
    pub fn sub(&self, other: &DenseMat) -> DenseMat {
        assert_eq!(self.n, other.n);
        DenseMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// D^{-1/2} * self * D^{-1/2} for a positive diagonal given as a vector.
    /// Requires an anti-symmetric input; the upper triangle is mirrored with
    /// negation so the result stays anti-symmetric to the bit.
    pub fn symmetric_scale(&self, diag: &[f64]) -> DenseMat {
        assert_eq!(diag.len(), self.n);
        debug_assert!(self.is_antisymmetric());
        let inv_sqrt: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
        let mut out = DenseMat::zeros(self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j) * inv_sqrt[i] * inv_sqrt[j];
                out.set(i, j, v);
                out.set(j, i, if v == 0.0 { 0.0 } else { -v });
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Real vector helpers
// ---------------------------------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn scale_in_place(a: &mut [f64], c: f64) {
    for v in a.iter_mut() {
        *v *= c;
    }
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm2(a);
    a.iter().map(|v| v / n).collect()
}

pub fn sum(a: &[f64]) -> f64 {
    a.iter().sum()
}

// ---------------------------------------------------------------------------
// Complex vectors as paired real vectors
// ---------------------------------------------------------------------------

/// Complex vector stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CVec {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Self {
        assert_eq!(re.len(), im.len());
        CVec { re, im }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn norm(&self) -> f64 {
        (dot(&self.re, &self.re) + dot(&self.im, &self.im)).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.re
            .iter()
            .zip(self.im.iter())
            .fold(0.0, |m, (x, y)| m.max(x.hypot(*y)))
    }

    pub fn normalized(&self) -> CVec {
        let n = self.norm();
        CVec {
            re: self.re.iter().map(|v| v / n).collect(),
            im: self.im.iter().map(|v| v / n).collect(),
        }
    }

    /// Hermitian inner product <self, other> = self^H other.
    pub fn hdot(&self, other: &CVec) -> Complex64 {
        let re = dot(&self.re, &other.re) + dot(&self.im, &other.im);
        let im = dot(&self.re, &other.im) - dot(&self.im, &other.re);
        Complex64::new(re, im)
    }

    /// e^{i theta} * self.
    pub fn rotated(&self, theta: f64) -> CVec {
        self.scaled(Complex64::from_polar(1.0, theta))
    }

    /// c * self for a complex scalar c.
    pub fn scaled(&self, c: Complex64) -> CVec {
        let n = self.len();
        let mut re = Vec::with_capacity(n);
        let mut im = Vec::with_capacity(n);
        for k in 0..n {
            re.push(c.re * self.re[k] - c.im * self.im[k]);
            im.push(c.re * self.im[k] + c.im * self.re[k]);
        }
        CVec { re, im }
    }

    /// self - c * other.
    pub fn sub_scaled(&self, c: Complex64, other: &CVec) -> CVec {
        let o = other.scaled(c);
        CVec {
            re: self.re.iter().zip(o.re.iter()).map(|(a, b)| a - b).collect(),
            im: self.im.iter().zip(o.im.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}
