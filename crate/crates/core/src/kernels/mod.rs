//! Dense kernels every factorization is built from.

mod cpqr;
mod gemm;
mod jacobi;
mod norm;
mod qr;

pub use cpqr::{cpqr, CpqrFactors};
pub use gemm::matmul;
pub use jacobi::{jacobi_svd, JACOBI_TOL, MAX_SWEEPS};
pub use norm::{spectral_norm, NormEstimate, EXACT_COLS};
pub use qr::{qr, qr_with_block_size, QrFactors, DEFAULT_BLOCK_SIZE};

pub use crate::rng::gaussian_matrix;
pub(crate) use norm::spectral_norm_strict;
pub(crate) use qr::solve_right_upper;
