//! Binary matrix/vector files.
//!
//! Layout: a 16-byte header (`b"ISHT"`, `u32` rows, `u32` cols, 4 zero bytes),
//! all little-endian, followed by `rows * cols` little-endian `f64` values in
//! column-major order. Vectors are stored as `len x 1` matrices.

use std::fs;
use std::path::Path;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ISHT";
pub const HEADER_LEN: usize = 16;

pub fn encode(m: &DenseMatrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.nrows())
        .map_err(|_| Error::InvalidOperator("row count exceeds u32".into()))?;
    let cols = u32::try_from(m.ncols())
        .map_err(|_| Error::InvalidOperator("column count exceeds u32".into()))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * m.as_col_major().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&cols.to_le_bytes());
    buf.extend_from_slice(&[0u8; 4]);
    for v in m.as_col_major() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<DenseMatrix> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let (rows, cols, reserved) = (word(4) as usize, word(8) as usize, word(12));
    if reserved != 0 {
        return Err(bad("reserved header bytes are not zero".into()));
    }
    let expected = HEADER_LEN + 8 * rows * cols;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for {rows}x{cols}, found {}", bytes.len())));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_col_major(rows, cols, data)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(m)?).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let m = DenseMatrix::from_col_major(v.len(), 1, v.to_vec())?;
    write_matrix(path, &m)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected a vector (1 column), found {} columns", m.ncols()),
        });
    }
    Ok(m.into_col_major())
}
