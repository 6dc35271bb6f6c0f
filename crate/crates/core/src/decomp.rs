//! Randomized and pivoted QLP factorizations.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{cpqr, matmul, qr};
use crate::matrix::DenseMatrix;
use crate::rng::{gaussian_matrix, GaussianStream};

/// Thin SVD `A = U diag(sigma) V^T`, `sigma` nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    /// Leading `k` left singular vectors.
    pub fn u_k(&self, k: usize) -> DenseMatrix {
        self.u.columns(0..k)
    }

    pub fn u_perp(&self, k: usize) -> DenseMatrix {
        self.u.columns(k..self.u.cols())
    }

    pub fn v_k(&self, k: usize) -> DenseMatrix {
        self.v.columns(0..k)
    }

    pub fn v_perp(&self, k: usize) -> DenseMatrix {
        self.v.columns(k..self.v.cols())
    }

    /// Best rank-`k` approximation `U_k Σ_k V_k^T`.
    pub fn truncate(&self, k: usize) -> Result<DenseMatrix> {
        let mut us = self.u_k(k);
        us.scale_columns(&self.sigma[..k]);
        matmul(&us, &self.v_k(k), false, true)
    }
}

/// `A = Q L P^T` with orthonormal Q (m x n), P (n x n) and lower-triangular L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QlpFactors {
    pub q: DenseMatrix,
    pub l: DenseMatrix,
    pub p: DenseMatrix,
    /// Seed of the Gaussian sketch; `None` for deterministic factorizations.
    pub seed: Option<u64>,
}

impl QlpFactors {
    /// Views an SVD as a QLP triple with diagonal L.
    pub fn from_svd(svd: &SvdFactors) -> Self {
        Self { q: svd.u.clone(), l: DenseMatrix::from_diag(&svd.sigma), p: svd.v.clone(), seed: None }
    }

    pub fn rows(&self) -> usize {
        self.q.rows()
    }

    pub fn cols(&self) -> usize {
        self.l.cols()
    }

    /// Raw diagonal of L in factor order.
    pub fn diag_estimates(&self) -> Vec<f64> {
        self.l.diag()
    }

    /// |diag(L)| sorted nonincreasing, the form compared against singular values.
    pub fn sorted_estimates(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.l.diag().into_iter().map(f64::abs).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        d
    }

    /// `Q L P^T`.
    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        let ql = matmul(&self.q, &self.l, false, false)?;
        matmul(&ql, &self.p, false, true)
    }

    /// The leading `m x k` block of the sketch Ω, regenerated from the seed.
    pub fn omega_head(&self, k: usize) -> Result<DenseMatrix> {
        let seed = self.seed.ok_or(Error::NotApplicable("factors were not produced from a Gaussian sketch"))?;
        if k > self.cols() {
            return Err(invalid("k", alloc::format!("{k} exceeds {} sketch columns", self.cols())));
        }
        Ok(gaussian_matrix(&mut GaussianStream::new(seed), self.rows(), k))
    }

    pub fn q1(&self, k: usize) -> DenseMatrix {
        self.q.columns(0..k)
    }

    pub fn q2(&self, k: usize) -> DenseMatrix {
        self.q.columns(k..self.q.cols())
    }

    pub fn p1(&self, k: usize) -> DenseMatrix {
        self.p.columns(0..k)
    }

    pub fn p2(&self, k: usize) -> DenseMatrix {
        self.p.columns(k..self.p.cols())
    }

    pub fn l11(&self, k: usize) -> DenseMatrix {
        self.l.submatrix(0..k, 0..k)
    }

    pub fn l21(&self, k: usize) -> DenseMatrix {
        let n = self.cols();
        self.l.submatrix(k..n, 0..k)
    }

    pub fn l22(&self, k: usize) -> DenseMatrix {
        let n = self.cols();
        self.l.submatrix(k..n, k..n)
    }
}

fn check_input(op: &'static str, a: &DenseMatrix) -> Result<()> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::NotTall { op, rows: m, cols: n });
    }
    if n == 0 {
        return Err(invalid("a", "matrix has no columns"));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite { op });
    }
    Ok(())
}

/// Randomized QLP.
///
/// ```text
/// Ω  = randn(m, n)          (seeded)
/// Q̄  = orth(Aᵀ Ω)
/// Q  = orth(A Q̄)
/// P R = qr((Qᵀ A)ᵀ),  L = Rᵀ
/// ```
///
/// Only unpivoted QR and matrix products are involved.
pub fn rand_qlp(a: &DenseMatrix, seed: u64) -> Result<QlpFactors> {
    check_input("rand_qlp", a)?;
    let (m, n) = a.shape();
    let omega = gaussian_matrix(&mut GaussianStream::new(seed), m, n);
    let sketch = matmul(a, &omega, true, false)?;
    let q_bar = qr(&sketch)?.q;
    let range = matmul(a, &q_bar, false, false)?;
    let q = qr(&range)?.q;
    // (Q^T A)^T = A^T Q
    let at_q = matmul(a, &q, true, false)?;
    let f = qr(&at_q)?;
    Ok(QlpFactors { q, l: f.r.transpose(), p: f.q, seed: Some(seed) })
}

/// Pivoted QLP: CPQR of A, then CPQR of the transposed triangular factor.
///
/// With `A Π = Q₁ R₁` and `R₁ᵀ Π́ = Q́ Ŕ` this returns `Q = Q₁ Π́`,
/// `L = Ŕᵀ` and `P = Π Q́`, so `A = Q L Pᵀ` exactly and L is lower triangular.
pub fn pivoted_qlp(a: &DenseMatrix) -> Result<QlpFactors> {
    check_input("pivoted_qlp", a)?;
    let first = cpqr(a)?;
    let second = cpqr(&first.r.transpose())?;
    let q = first.q.permute_columns(&second.perm);
    let l = second.r.transpose();
    // Π Q́: row perm[j] of the product is row j of Q́.
    let n = a.cols();
    let mut inverse = alloc::vec![0usize; n];
    for (j, &src) in first.perm.iter().enumerate() {
        inverse[src] = j;
    }
    let p = second.q.permute_rows(&inverse);
    Ok(QlpFactors { q, l, p, seed: None })
}

/// Rank-`k` approximation `Q [L₁₁; L₂₁] P₁ᵀ`.
pub fn rank_k_approx(f: &QlpFactors, k: usize) -> Result<DenseMatrix> {
    let n = f.cols();
    if k == 0 || k > n {
        return Err(invalid("k", alloc::format!("rank must lie in 1..={n}, got {k}")));
    }
    let lk = f.l.columns(0..k);
    let qlk = matmul(&f.q, &lk, false, false)?;
    matmul(&qlk, &f.p1(k), false, true)
}

/// Flop model for randomized QLP: `8mn² + 3n³ − 2n²`.
pub fn flops_rand_qlp(m: u64, n: u64) -> u64 {
    8 * m * n * n + 3 * n * n * n - 2 * n * n
}

/// Flop model for column-pivoted QR: `2mn² + n³ + 4(m²n − mn²)`.
pub fn flops_cpqr(m: u64, n: u64) -> u64 {
    2 * m * n * n + n * n * n + 4 * (m * m * n - m * n * n)
}
