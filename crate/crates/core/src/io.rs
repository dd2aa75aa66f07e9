//! On-disk formats: a small binary container for matrices and CSV dumps for
//! debugging.
//!
//! Binary container layout: magic bytes `ERO1`, little-endian `u64` dimension
//! `n`, then `n*n` little-endian `f64` entries in row-major order.

use std::io::{self, Read, Write};

use crate::ero::GroundTruth;
use crate::mat::DenseMat;

pub const MAGIC: &[u8; 4] = b"ERO1";

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes; not an ERO1 container")]
    BadMagic,
    #[error("truncated container")]
    Truncated,
}

pub fn write_matrix<W: Write>(w: &mut W, m: &DenseMat) -> Result<(), ContainerError> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.n() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.n() * 8);
    for i in 0..m.n() {
        buf.clear();
        for &v in m.row(i) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<DenseMat, ContainerError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| ContainerError::Truncated)?;
    if &magic != MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let mut nbuf = [0u8; 8];
    r.read_exact(&mut nbuf).map_err(|_| ContainerError::Truncated)?;
    let n = u64::from_le_bytes(nbuf) as usize;
    let mut m = DenseMat::zeros(n);
    let mut ebuf = [0u8; 8];
    for i in 0..n {
        for j in 0..n {
            r.read_exact(&mut ebuf).map_err(|_| ContainerError::Truncated)?;
            m.set(i, j, f64::from_le_bytes(ebuf));
        }
    }
    Ok(m)
}

/// Matrix as CSV, one row per line.
pub fn matrix_to_csv<W: Write>(w: &mut W, m: &DenseMat) -> io::Result<()> {
    for i in 0..m.n() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Ground truth as CSV with header `index,score`.
pub fn ground_truth_to_csv<W: Write>(w: &mut W, gt: &GroundTruth) -> io::Result<()> {
    writeln!(w, "index,score")?;
    for (i, s) in gt.scores.iter().enumerate() {
        writeln!(w, "{i},{s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn container_round_trip() {
        let m = DenseMat::from_fn(5, |i, j| (i as f64) - 1.5 * (j as f64));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(&buf[..4], MAGIC);
        let back = read_matrix(&mut buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn bad_magic_is_detected() {
        let buf = b"NOPE\x03\x00\x00\x00\x00\x00\x00\x00".to_vec();
        assert!(matches!(
            read_matrix(&mut buf.as_slice()),
            Err(ContainerError::BadMagic)
        ));
    }

    #[test]
    fn ground_truth_csv_has_header() {
        let gt = GroundTruth::custom(vec![1.5, 2.5]).unwrap();
        let mut out = Vec::new();
        ground_truth_to_csv(&mut out, &gt).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("index,score\n0,1.5\n1,2.5\n"));
    }
}
