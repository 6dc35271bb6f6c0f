//! Randomized QLP decomposition and its classical baselines.
//!
//! The crate is `no_std` (it needs `alloc`) and carries everything that is
//! pure computation: dense kernels (blocked Householder QR, column-pivoted
//! QR, one-sided Jacobi SVD, GEMM), the randomized and pivoted QLP
//! factorizations, evaluation of the rank-revealing and subspace error
//! bounds, synthetic test-matrix generation and quality metrics.
//!
//! File formats, the command-line harness and timing live in the `randqlp`
//! companion crate.

#![no_std]

extern crate alloc;

mod error;
mod math;
mod matrix;

pub mod bounds;
pub mod decomp;
pub mod kernels;
pub mod matgen;
pub mod metrics;
pub mod rng;

pub use bounds::{
    check_theorem1, check_theorem2, omega_split, verify_bounds, AngleSet, BoundReport, OmegaSplit, Reading, Violation,
};
pub use decomp::{flops_cpqr, flops_rand_qlp, pivoted_qlp, rand_qlp, rank_k_approx, QlpFactors, SvdFactors};
pub use error::{Error, Result};
pub use kernels::{
    cpqr, jacobi_svd, matmul, qr, qr_with_block_size, spectral_norm, CpqrFactors, NormEstimate, QrFactors,
};
pub use matgen::{build, random_orthogonal, NoiseNormalization, SpectrumKind, SpectrumSpec, TestMatrix};
pub use matrix::DenseMatrix;
pub use metrics::{lowrank_error_curve, subspace_distance, sv_compare, ApproxErrorCurve, SvComparison};
pub use rng::GaussianStream;

/// Unit roundoff for `f64` as used in the tolerance contracts.
pub const EPS: f64 = f64::EPSILON;
