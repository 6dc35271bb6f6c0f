//! Wall-clock timing: one warm-up, then the median of `repeats` runs.

use randqlp_core::rng::gaussian_matrix;
use randqlp_core::{DenseMatrix, GaussianStream};

use crate::algs::{timed, Alg};
use crate::error::{Error, Result};
use crate::io::tables::BenchRow;

pub const DEFAULT_REPEATS: usize = 5;

/// Stream domain of benchmark inputs.
const BENCH_DOMAIN: u64 = 0x62_656e_6368;

pub fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

pub fn bench_matrix(a: &DenseMatrix, algs: &[Alg], repeats: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        return Err(Error::Usage("--repeats must be at least 1".into()));
    }
    let (m, n) = a.shape();
    let mut rows = Vec::with_capacity(algs.len());
    for &alg in algs {
        timed(alg, a, seed)?;
        let mut times: Vec<f64> = (0..repeats).map(|_| timed(alg, a, seed).map(|(_, t)| t)).collect::<Result<_>>()?;
        rows.push(BenchRow {
            n,
            alg: alg.name().to_string(),
            seconds: median(&mut times),
            flops_model: alg.flops(m, n),
        });
    }
    Ok(rows)
}

/// Square Gaussian inputs of each size.
pub fn bench_sizes(sizes: &[usize], algs: &[Alg], repeats: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        if n == 0 {
            return Err(Error::Usage("sizes must be positive".into()));
        }
        let a = gaussian_matrix(&mut GaussianStream::with_domain(seed, BENCH_DOMAIN), n, n);
        rows.extend(bench_matrix(&a, algs, repeats, seed)?);
    }
    Ok(rows)
}
