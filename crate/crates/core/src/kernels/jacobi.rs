use alloc::vec::Vec;

use super::gemm::matmul;
use super::qr::qr;
use crate::decomp::SvdFactors;
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::DenseMatrix;

pub const JACOBI_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Tall inputs are first reduced by QR so the rotations act on an `n x n`
/// triangle. Pairs are rotated until every relative off-diagonal Gram entry
/// `|g_ij| / sqrt(g_ii g_jj)` is at most [`JACOBI_TOL`].
pub fn jacobi_svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::NotTall { op: "jacobi_svd", rows: m, cols: n });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite { op: "jacobi_svd" });
    }
    if m > n {
        let f = qr(a)?;
        let inner = jacobi_square(f.r)?;
        let u = matmul(&f.q, &inner.u, false, false)?;
        return Ok(SvdFactors { u, sigma: inner.sigma, v: inner.v });
    }
    jacobi_square(a.clone())
}

fn jacobi_square(mut w: DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = w.shape();
    let mut v = DenseMatrix::identity(n);
    let mut converged = n < 2;
    let mut sweeps = 0;
    let mut max_off = 0.0f64;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        max_off = 0.0;
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let (wi, wj) = w.col_pair_mut(i, j);
                let alpha = math::dot(wi, wi);
                let beta = math::dot(wj, wj);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = math::dot(wi, wj);
                let off = gamma.abs() / math::sqrt(alpha) / math::sqrt(beta);
                max_off = max_off.max(off);
                if off <= JACOBI_TOL {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + math::hypot(1.0, zeta));
                let c = 1.0 / math::hypot(1.0, t);
                let s = c * t;
                rotate(wi, wj, c, s);
                let (vi, vj) = v.col_pair_mut(i, j);
                rotate(vi, vj, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps, max_off_diagonal: max_off });
    }

    let norms: Vec<f64> = (0..n).map(|j| math::norm2(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut u = DenseMatrix::zeros(m, n);
    let mut sigma = Vec::with_capacity(n);
    let mut vs = DenseMatrix::zeros(n, n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        vs.col_mut(dst).copy_from_slice(v.col(src));
        if s > 0.0 {
            for (ud, wv) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *ud = wv / s;
            }
        } else {
            missing.push(dst);
        }
    }
    complete_basis(&mut u, &missing);
    Ok(SvdFactors { u, sigma, v: vs })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fills the listed (zero) columns of `u` with unit vectors orthogonal to
/// every other column, by twice-repeated Gram–Schmidt on coordinate vectors.
fn complete_basis(u: &mut DenseMatrix, missing: &[usize]) {
    let m = u.rows();
    let mut candidate = 0;
    for &col in missing {
        loop {
            let mut x = alloc::vec![0.0; m];
            x[candidate % m] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for j in 0..u.cols() {
                    if j == col {
                        continue;
                    }
                    let p = math::dot(u.col(j), &x);
                    math::axpy(-p, u.col(j), &mut x);
                }
            }
            let nx = math::norm2(&x);
            if nx > 0.5 {
                for (d, xv) in u.col_mut(col).iter_mut().zip(&x) {
                    *d = xv / nx;
                }
                break;
            }
            if candidate > 2 * m {
                break;
            }
        }
    }
}
