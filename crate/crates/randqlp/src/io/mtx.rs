//! Matrix Market reader (coordinate and array, real or integer, general or
//! symmetric), densified.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use randqlp_core::DenseMatrix;

use crate::error::{Error, Result};

/// Default cap on the dense size of a loaded matrix: 2 GiB.
pub const DEFAULT_MEM_CAP: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

pub fn read_matrix_market(path: &Path, mem_cap: u64) -> Result<DenseMatrix> {
    let file = File::open(path).map_err(Error::io(path))?;
    parse(BufReader::new(file), path, mem_cap)
}

/// Parses Matrix Market text; `path` only labels error messages.
pub fn parse(reader: impl BufRead, path: &Path, mem_cap: u64) -> Result<DenseMatrix> {
    let fail = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    let header = header.map_err(Error::io(path))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(fail(1, format!("expected `%%MatrixMarket matrix <format> <field> <symmetry>`, got `{header}`")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(fail(1, format!("unknown format `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(fail(1, format!("unsupported field `{other}` (only real and integer)"))),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(fail(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut data_lines = lines.filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('%')
        }
        Err(_) => true,
    });
    let mut last = 1;
    let mut next = |what: &str| -> Result<(usize, String)> {
        match data_lines.next() {
            Some((n, Ok(s))) => {
                last = n;
                Ok((n, s))
            }
            Some((_, Err(e))) => Err(Error::Io { path: path.to_path_buf(), source: e }),
            None => Err(fail(last + 1, format!("unexpected end of file while reading {what}"))),
        }
    };

    let (size_line, size) = next("the size line")?;
    let dims: Vec<u64> = size
        .split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| fail(size_line, format!("bad size entry `{t}`"))))
        .collect::<Result<_>>()?;
    let expected = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(fail(size_line, format!("expected {expected} size fields, got {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetric && rows != cols {
        return Err(fail(size_line, format!("symmetric matrix must be square, got {rows}x{cols}")));
    }
    let bytes = rows as u128 * cols as u128 * 8;
    if bytes > mem_cap as u128 {
        return Err(Error::Capacity { rows, cols, bytes, cap: mem_cap });
    }
    let (m, n) = (rows as usize, cols as usize);
    let mut a = DenseMatrix::zeros(m, n);

    let value = |line: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| fail(line, format!("bad value `{t}`")))?;
        if !v.is_finite() {
            return Err(fail(line, format!("non-finite value `{t}`")));
        }
        Ok(v)
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            for _ in 0..nnz {
                let (ln, s) = next("entries")?;
                let t: Vec<&str> = s.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(fail(ln, format!("expected `row col value`, got `{}`", s.trim())));
                }
                let idx = |tok: &str, bound: u64| -> Result<usize> {
                    let i: u64 = tok.parse().map_err(|_| fail(ln, format!("bad index `{tok}`")))?;
                    if i == 0 || i > bound {
                        return Err(fail(ln, format!("index {i} out of range 1..={bound}")));
                    }
                    Ok(i as usize - 1)
                };
                let (i, j) = (idx(t[0], rows)?, idx(t[1], cols)?);
                let v = value(ln, t[2])?;
                if symmetric && j > i {
                    return Err(fail(ln, "symmetric storage must list the lower triangle".into()));
                }
                a[(i, j)] += v;
                if symmetric && i != j {
                    a[(j, i)] += v;
                }
            }
        }
        Layout::Array => {
            // Column-major; symmetric storage lists the lower triangle only.
            for j in 0..n {
                let start = if symmetric { j } else { 0 };
                for i in start..m {
                    let (ln, s) = next("entries")?;
                    let t: Vec<&str> = s.split_whitespace().collect();
                    if t.len() != 1 {
                        return Err(fail(ln, format!("expected one value, got `{}`", s.trim())));
                    }
                    let v = value(ln, t[0])?;
                    a[(i, j)] = v;
                    if symmetric {
                        a[(j, i)] = v;
                    }
                }
            }
        }
    }
    if let Some((ln, _)) = data_lines.next() {
        return Err(fail(ln, "trailing data after the declared entries".into()));
    }
    Ok(a)
}
