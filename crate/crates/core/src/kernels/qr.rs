//! Householder QR: unblocked panels, compact-WY blocked trailing updates and
//! blocked accumulation of the thin Q factor.

use alloc::vec;
use alloc::vec::Vec;

use super::gemm::{gemm, View};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::DenseMatrix;

pub const DEFAULT_BLOCK_SIZE: usize = 32;

/// Thin QR factors `A = Q R` with `diag(R) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Turns `x` into `beta * e1` and stores the reflector tail in `x[1..]`
/// (implicit leading 1). Returns `tau` such that `H = I - tau v v^T`.
pub(crate) fn make_reflector(x: &mut [f64]) -> f64 {
    if x.len() <= 1 {
        return 0.0;
    }
    let alpha = x[0];
    let xnorm = math::norm2(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -libm::copysign(math::hypot(alpha, xnorm), alpha);
    let tau = (beta - alpha) / beta;
    let scal = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scal;
    }
    x[0] = beta;
    tau
}

/// Applies `I - tau v v^T` to `c`, where `v = [1; tail]`.
#[inline]
pub(crate) fn apply_reflector(tau: f64, tail: &[f64], c: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let w = c[0] + math::dot(tail, &c[1..]);
    let tw = tau * w;
    c[0] -= tw;
    math::axpy(-tw, tail, &mut c[1..]);
}

/// Unblocked Householder reduction of columns `j0..j1` over rows `j0..m`.
fn factor_panel(work: &mut DenseMatrix, tau: &mut [f64], j0: usize, j1: usize) {
    for j in j0..j1 {
        tau[j] = make_reflector(&mut work.col_mut(j)[j..]);
        for c in j + 1..j1 {
            let (vj, cc) = work.col_pair_mut(j, c);
            apply_reflector(tau[j], &vj[j + 1..], &mut cc[j..]);
        }
    }
}

/// Explicit unit lower-trapezoidal reflector block `V` for columns `j0..j1`
/// (rows `j0..m`) and the upper-triangular `T` with `H_j0 ... H_j1-1 = I - V T V^T`.
fn block_reflectors(work: &DenseMatrix, tau: &[f64], j0: usize, j1: usize) -> (DenseMatrix, DenseMatrix) {
    let m = work.rows();
    let nb = j1 - j0;
    let rows = m - j0;
    let mut v = DenseMatrix::zeros(rows, nb);
    for c in 0..nb {
        let src = &work.col(j0 + c)[j0..];
        let dst = v.col_mut(c);
        dst[c] = 1.0;
        dst[c + 1..].copy_from_slice(&src[c + 1..]);
    }
    let mut t = DenseMatrix::zeros(nb, nb);
    let mut w = vec![0.0; nb];
    for c in 0..nb {
        let tc = tau[j0 + c];
        t[(c, c)] = tc;
        if tc == 0.0 || c == 0 {
            continue;
        }
        // w = -tau_c * V[:, 0..c]^T v_c, only rows >= c of v_c are nonzero
        let vc = &v.col(c)[c..];
        for (p, wp) in w.iter_mut().enumerate().take(c) {
            *wp = -tc * math::dot(&v.col(p)[c..], vc);
        }
        // T[0..c, c] = T[0..c, 0..c] * w
        for i in 0..c {
            let mut s = 0.0;
            for (p, wp) in w.iter().enumerate().take(c).skip(i) {
                s += t[(i, p)] * wp;
            }
            t[(i, c)] = s;
        }
    }
    (v, t)
}

/// Applies `(I - V T V^T)^T` (if `transpose_t`) or `I - V T V^T` to the
/// block of `target` with top-left corner `(r0, c0)`, `v.rows()` rows tall
/// and extending to the last column.
fn apply_block(v: &DenseMatrix, t: &DenseMatrix, transpose_t: bool, target: &mut DenseMatrix, r0: usize, c0: usize) {
    let ld = target.rows();
    let ncols = target.cols() - c0;
    if ncols == 0 {
        return;
    }
    let nb = v.cols();
    let off = r0 + c0 * ld;
    let sub = View::new(&target.as_slice()[off..], v.rows(), ncols, ld, false);
    let mut w = DenseMatrix::zeros(nb, ncols);
    gemm(1.0, View::of(v, true), sub, 0.0, w.as_mut_slice(), nb);
    let mut tw = DenseMatrix::zeros(nb, ncols);
    gemm(1.0, View::of(t, transpose_t), View::of(&w, false), 0.0, tw.as_mut_slice(), nb);
    gemm(-1.0, View::of(v, false), View::of(&tw, false), 1.0, &mut target.as_mut_slice()[off..], ld);
}

/// Householder factorization in place: R in the upper triangle, reflector
/// tails below the diagonal.
pub(crate) fn householder_in_place(work: &mut DenseMatrix, block_size: usize) -> Vec<f64> {
    let n = work.cols();
    let mut tau = vec![0.0; n];
    let nb = block_size.max(1);
    if n <= nb {
        factor_panel(work, &mut tau, 0, n);
        return tau;
    }
    let mut j0 = 0;
    while j0 < n {
        let j1 = (j0 + nb).min(n);
        factor_panel(work, &mut tau, j0, j1);
        if j1 < n {
            let (v, t) = block_reflectors(work, &tau, j0, j1);
            apply_block(&v, &t, true, work, j0, j1);
        }
        j0 = j1;
    }
    tau
}

/// Thin `m x n` Q from reflectors stored in `work`.
pub(crate) fn form_q(work: &DenseMatrix, tau: &[f64], block_size: usize) -> DenseMatrix {
    let (m, n) = work.shape();
    let mut q = DenseMatrix::eye(m, n);
    let nb = block_size.max(1);
    let starts: Vec<usize> = (0..n).step_by(nb).collect();
    for &j0 in starts.iter().rev() {
        let j1 = (j0 + nb).min(n);
        if j1 - j0 == 1 || n <= nb {
            for j in (j0..j1).rev() {
                let tail = &work.col(j)[j + 1..];
                for c in j..n {
                    apply_reflector(tau[j], tail, &mut q.col_mut(c)[j..]);
                }
            }
        } else {
            let (v, t) = block_reflectors(work, tau, j0, j1);
            apply_block(&v, &t, false, &mut q, j0, j0);
        }
    }
    q
}

pub(crate) fn upper_triangle(work: &DenseMatrix) -> DenseMatrix {
    let n = work.cols();
    let mut r = DenseMatrix::zeros(n, n);
    for j in 0..n {
        r.col_mut(j)[..=j].copy_from_slice(&work.col(j)[..=j]);
    }
    r
}

/// Flips (column of Q, row of R) pairs so that `diag(R) >= 0`.
pub(crate) fn normalize_signs(q: &mut DenseMatrix, r: &mut DenseMatrix) {
    let n = r.cols();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            for j in i..n {
                r[(i, j)] = -r[(i, j)];
            }
            for v in q.col_mut(i) {
                *v = -*v;
            }
        }
    }
}

/// Thin QR with the default block size.
pub fn qr(a: &DenseMatrix) -> Result<QrFactors> {
    qr_with_block_size(a, DEFAULT_BLOCK_SIZE)
}

/// Thin QR via blocked Householder reflections; `block_size` columns per panel.
pub fn qr_with_block_size(a: &DenseMatrix, block_size: usize) -> Result<QrFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::NotTall { op: "qr", rows: m, cols: n });
    }
    let mut work = a.clone();
    let tau = householder_in_place(&mut work, block_size);
    let mut q = form_q(&work, &tau, block_size);
    let mut r = upper_triangle(&work);
    normalize_signs(&mut q, &mut r);
    Ok(QrFactors { q, r })
}

/// Solves `Y R = B` for Y with R upper triangular (row-wise forward substitution).
pub(crate) fn solve_right_upper(b: &DenseMatrix, r: &DenseMatrix) -> DenseMatrix {
    let k = r.cols();
    let mut y = b.clone();
    for j in 0..k {
        for p in 0..j {
            let rpj = r[(p, j)];
            if rpj != 0.0 {
                let (yp, yj) = y.col_pair_mut(p, j);
                math::axpy(-rpj, yp, yj);
            }
        }
        let d = r[(j, j)];
        for v in y.col_mut(j) {
            *v /= d;
        }
    }
    y
}
