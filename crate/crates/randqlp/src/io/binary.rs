//! Raw matrix files: `b"RQLP"`, rows and cols as little-endian `u64`, then
//! `rows * cols` little-endian `f64` values in column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use randqlp_core::DenseMatrix;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RQLP";
pub const HEADER_LEN: usize = 20;

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    encode(&mut w, m).map_err(Error::io(path))?;
    w.flush().map_err(Error::io(path))
}

pub fn encode(w: &mut impl Write, m: &DenseMatrix) -> std::io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix(path: &Path, mem_cap: u64) -> Result<DenseMatrix> {
    let file = File::open(path).map_err(Error::io(path))?;
    let len = file.metadata().map_err(Error::io(path))?.len();
    let mut r = BufReader::new(file);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|_| format_error(path, "file shorter than the 20-byte header"))?;
    if header[..4] != MAGIC {
        return Err(format_error(path, "bad magic, expected RQLP"));
    }
    let rows = u64::from_le_bytes(header[4..12].try_into().unwrap());
    let cols = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let bytes = rows as u128 * cols as u128 * 8;
    if bytes > mem_cap as u128 {
        return Err(Error::Capacity { rows, cols, bytes, cap: mem_cap });
    }
    if len as u128 != HEADER_LEN as u128 + bytes {
        return Err(format_error(path, &format!("{rows}x{cols} header but {} payload bytes", len - HEADER_LEN as u64)));
    }
    let count = (rows * cols) as usize;
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw).map_err(Error::io(path))?;
    let data: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(format_error(path, "matrix contains NaN or infinite values"));
    }
    Ok(DenseMatrix::from_col_major(rows as usize, cols as usize, data)?)
}

fn format_error(path: &Path, detail: &str) -> Error {
    Error::Format { path: path.to_path_buf(), detail: detail.to_string() }
}
