use std::fmt;
use std::time::Instant;

use clap::ValueEnum;
use randqlp_core::{cpqr, jacobi_svd, pivoted_qlp, rand_qlp, CpqrFactors, DenseMatrix, QlpFactors, SvdFactors};
use randqlp_core::{flops_cpqr, flops_rand_qlp, matmul};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum)]
pub enum Alg {
    Randqlp,
    Pqlp,
    Cpqr,
    Svd,
}

impl Alg {
    pub const ALL: [Alg; 4] = [Alg::Randqlp, Alg::Pqlp, Alg::Cpqr, Alg::Svd];

    pub fn name(self) -> &'static str {
        match self {
            Alg::Randqlp => "randqlp",
            Alg::Pqlp => "pqlp",
            Alg::Cpqr => "cpqr",
            Alg::Svd => "svd",
        }
    }

    /// Flop model where one exists.
    pub fn flops(self, m: usize, n: usize) -> Option<u64> {
        match self {
            Alg::Randqlp => Some(flops_rand_qlp(m as u64, n as u64)),
            Alg::Cpqr => Some(flops_cpqr(m as u64, n as u64)),
            Alg::Pqlp | Alg::Svd => None,
        }
    }
}

impl fmt::Display for Alg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub enum Factors {
    Qlp(QlpFactors),
    Cpqr(CpqrFactors),
    Svd(SvdFactors),
}

impl Factors {
    /// Diagonal estimates in factor order (σ for the SVD).
    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            Factors::Qlp(f) => f.diag_estimates(),
            Factors::Cpqr(f) => f.r.diag(),
            Factors::Svd(f) => f.sigma.clone(),
        }
    }

    /// |diagonal| sorted nonincreasing.
    pub fn sorted_estimates(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.diagonal().into_iter().map(f64::abs).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        d
    }

    /// `‖A − product‖_F / ‖A‖_F` (the column permutation applied for CPQR).
    pub fn residual(&self, a: &DenseMatrix) -> Result<f64> {
        let (target, product) = match self {
            Factors::Qlp(f) => (None, f.reconstruct()?),
            Factors::Cpqr(f) => (Some(a.permute_columns(&f.perm)), matmul(&f.q, &f.r, false, false)?),
            Factors::Svd(f) => {
                let mut us = f.u.clone();
                us.scale_columns(&f.sigma);
                (None, matmul(&us, &f.v, false, true)?)
            }
        };
        let target = target.as_ref().unwrap_or(a);
        let norm = a.frobenius_norm();
        let diff = target.sub(&product)?.frobenius_norm();
        Ok(if norm == 0.0 { diff } else { diff / norm })
    }

    /// Named dense factors for output.
    pub fn matrices(&self) -> Vec<(&'static str, &DenseMatrix)> {
        match self {
            Factors::Qlp(f) => vec![("q", &f.q), ("l", &f.l), ("p", &f.p)],
            Factors::Cpqr(f) => vec![("q", &f.q), ("r", &f.r)],
            Factors::Svd(f) => vec![("u", &f.u), ("v", &f.v)],
        }
    }
}

pub fn run(alg: Alg, a: &DenseMatrix, seed: u64) -> Result<Factors> {
    Ok(match alg {
        Alg::Randqlp => Factors::Qlp(rand_qlp(a, seed)?),
        Alg::Pqlp => Factors::Qlp(pivoted_qlp(a)?),
        Alg::Cpqr => Factors::Cpqr(cpqr(a)?),
        Alg::Svd => Factors::Svd(jacobi_svd(a)?),
    })
}

/// Runs `alg` once and reports its wall time in seconds.
pub fn timed(alg: Alg, a: &DenseMatrix, seed: u64) -> Result<(Factors, f64)> {
    let start = Instant::now();
    let f = run(alg, a, seed)?;
    Ok((f, start.elapsed().as_secs_f64()))
}
