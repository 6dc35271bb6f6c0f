//! CSV tables with fixed headers.

use std::path::Path;

use randqlp_core::{ApproxErrorCurve, SvComparison};

use crate::error::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(Error::csv(path))
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(Error::csv(path))?;
    for row in rows {
        w.write_record(&row).map_err(Error::csv(path))?;
    }
    w.flush().map_err(Error::io(path))
}

fn num(v: f64) -> String {
    // Shortest representation that round-trips.
    format!("{v:e}")
}

/// `i, sigma` with one-based `i`.
pub fn write_sigma(path: &Path, sigma: &[f64]) -> Result<()> {
    let header = ["i".to_string(), "sigma".to_string()];
    write_rows(path, &header, sigma.iter().enumerate().map(|(i, s)| vec![(i + 1).to_string(), num(*s)]))
}

/// `i, <name>...`: one column of estimates per algorithm.
pub fn write_columns(path: &Path, names: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    let mut header = vec!["i".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    let len = columns.iter().map(Vec::len).max().unwrap_or(0);
    write_rows(
        path,
        &header,
        (0..len).map(|i| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(columns.iter().map(|c| c.get(i).map_or(String::new(), |v| num(*v))));
            row
        }),
    )
}

/// `i, sigma_ref, sigma_<alg>..., relerr_<alg>...`.
pub fn write_sv_compare(path: &Path, names: &[&str], rows: &[SvComparison]) -> Result<()> {
    let mut header = vec!["i".to_string(), "sigma_ref".to_string()];
    header.extend(names.iter().map(|n| format!("sigma_{n}")));
    header.extend(names.iter().map(|n| format!("relerr_{n}")));
    write_rows(
        path,
        &header,
        rows.iter().map(|r| {
            let mut row = vec![(r.index + 1).to_string(), num(r.reference)];
            row.extend(r.estimates.iter().map(|v| num(*v)));
            row.extend(r.relative_errors.iter().map(|v| num(*v)));
            row
        }),
    )
}

/// `k, frob, frob_opt, spec, spec_opt`.
pub fn write_error_curve(path: &Path, curve: &ApproxErrorCurve) -> Result<()> {
    let header: Vec<String> = ["k", "frob", "frob_opt", "spec", "spec_opt"].iter().map(|s| s.to_string()).collect();
    write_rows(
        path,
        &header,
        (0..curve.ks.len()).map(|i| {
            vec![
                curve.ks[i].to_string(),
                num(curve.frobenius[i]),
                num(curve.optimal_frobenius[i]),
                num(curve.spectral[i]),
                num(curve.optimal_spectral[i]),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub alg: String,
    pub seconds: f64,
    pub flops_model: Option<u64>,
}

/// `n, alg, seconds, flops_model` (empty when no model exists for the algorithm).
pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let header: Vec<String> = ["n", "alg", "seconds", "flops_model"].iter().map(|s| s.to_string()).collect();
    write_rows(
        path,
        &header,
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.alg.clone(),
                format!("{:.6}", r.seconds),
                r.flops_model.map_or(String::new(), |f| f.to_string()),
            ]
        }),
    )
}
