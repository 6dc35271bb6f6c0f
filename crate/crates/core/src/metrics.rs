//! Singular value comparison, rank-k errors and subspace distances.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::decomp::{rank_k_approx, QlpFactors, SvdFactors};
use crate::error::{invalid, Error, Result};
use crate::kernels::{matmul, spectral_norm_strict};
use crate::math;
use crate::matrix::DenseMatrix;

/// Inputs further than this from orthonormal are rejected by [`subspace_distance`].
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Relative tolerance of the spectral-norm estimates in error curves.
pub const SPECTRAL_TOL: f64 = 1e-8;

const DISTANCE_TOL: f64 = 1e-12;

/// Sine of the largest canonical angle between `range(X)` and `range(Y)`,
/// measured as `‖(I − X Xᵀ) Y‖₂ = σ_max(Y − X (Xᵀ Y))`.
pub fn subspace_distance(x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch { op: "subspace_distance", left: x.shape(), right: y.shape() });
    }
    for basis in [x, y] {
        let dev = basis.orthonormality_error();
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
    }
    if y.cols() == 0 {
        return Ok(0.0);
    }
    if x.cols() == 0 {
        return Ok(1.0);
    }
    let xty = matmul(x, y, true, false)?;
    let mut z = y.clone();
    let proj = matmul(x, &xty, false, false)?;
    z.add_scaled(-1.0, &proj)?;
    let s = spectral_norm_strict(&z, DISTANCE_TOL)?;
    Ok(s.clamp(0.0, 1.0))
}

/// One row of a singular value comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvComparison {
    /// Zero-based position.
    pub index: usize,
    pub reference: f64,
    /// One entry per algorithm, in the order given to [`sv_compare`].
    pub estimates: Vec<f64>,
    pub relative_errors: Vec<f64>,
}

/// `|est − ref| / ref`, with `0/0 = 0` and `x/0 = ∞`.
pub fn relative_error(reference: f64, estimate: f64) -> f64 {
    if reference == 0.0 {
        if estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (estimate - reference).abs() / reference
    }
}

/// Index-aligned comparison of sorted estimates against the oracle spectrum.
pub fn sv_compare(oracle: &SvdFactors, estimates: &[&[f64]]) -> Result<Vec<SvComparison>> {
    let n = oracle.sigma.len();
    for (i, e) in estimates.iter().enumerate() {
        if e.len() != n {
            return Err(invalid("estimates", alloc::format!("estimate {i} has {} values, oracle has {n}", e.len())));
        }
    }
    Ok((0..n)
        .map(|i| {
            let reference = oracle.sigma[i];
            let est: Vec<f64> = estimates.iter().map(|e| e[i]).collect();
            let rel = est.iter().map(|e| relative_error(reference, *e)).collect();
            SvComparison { index: i, reference, estimates: est, relative_errors: rel }
        })
        .collect())
}

/// Rank-k approximation errors next to their Eckart–Young optima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxErrorCurve {
    pub ks: Vec<usize>,
    pub frobenius: Vec<f64>,
    pub spectral: Vec<f64>,
    pub optimal_frobenius: Vec<f64>,
    pub optimal_spectral: Vec<f64>,
}

impl ApproxErrorCurve {
    /// Frobenius errors nonincreasing in k, up to `slack` relative to the first error.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let scale = self.frobenius.first().copied().unwrap_or(0.0);
        self.frobenius.windows(2).all(|w| w[1] <= w[0] + slack * scale)
    }

    /// Largest `error / optimum` over the curve (Frobenius); points with a zero optimum are skipped.
    pub fn worst_frobenius_ratio(&self) -> f64 {
        self.frobenius
            .iter()
            .zip(&self.optimal_frobenius)
            .filter(|(_, o)| **o > 0.0)
            .map(|(e, o)| e / o)
            .fold(0.0, f64::max)
    }
}

/// Eckart–Young rank-`k` errors `(‖·‖_F, ‖·‖₂)` for a nonincreasing spectrum.
pub fn optimal_errors(sigma: &[f64], k: usize) -> (f64, f64) {
    let tail = &sigma[k.min(sigma.len())..];
    let frob = math::sqrt(tail.iter().map(|s| s * s).sum());
    (frob, tail.first().copied().unwrap_or(0.0))
}

pub fn lowrank_error_curve(
    a: &DenseMatrix,
    factors: &QlpFactors,
    ks: &[usize],
    oracle: &SvdFactors,
) -> Result<ApproxErrorCurve> {
    let n = factors.cols();
    if ks.is_empty() {
        return Err(invalid("ks", "no ranks requested"));
    }
    if ks.windows(2).any(|w| w[1] <= w[0]) || ks[0] == 0 || *ks.last().unwrap() > n {
        return Err(invalid("ks", alloc::format!("ranks must be strictly increasing within 1..={n}")));
    }
    let mut curve = ApproxErrorCurve {
        ks: ks.to_vec(),
        frobenius: Vec::with_capacity(ks.len()),
        spectral: Vec::with_capacity(ks.len()),
        optimal_frobenius: Vec::with_capacity(ks.len()),
        optimal_spectral: Vec::with_capacity(ks.len()),
    };
    for &k in ks {
        let approx = rank_k_approx(factors, k)?;
        let err = a.sub(&approx)?;
        curve.frobenius.push(err.frobenius_norm());
        curve.spectral.push(spectral_norm_strict(&err, SPECTRAL_TOL)?);
        let (f, s) = optimal_errors(&oracle.sigma, k);
        curve.optimal_frobenius.push(f);
        curve.optimal_spectral.push(s);
    }
    Ok(curve)
}
