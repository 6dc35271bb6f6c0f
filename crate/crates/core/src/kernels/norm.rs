use alloc::vec;
use alloc::vec::Vec;

use super::gemm::{matvec, matvec_t};
use super::jacobi::jacobi_svd;
use crate::error::{invalid, Result};
use crate::math;
use crate::matrix::DenseMatrix;
use crate::rng::GaussianStream;

/// Matrices with at most this many columns get an exact Jacobi answer.
pub const EXACT_COLS: usize = 32;

const START_SEED: u64 = 0x5eed_0f2a;

/// Result of a spectral norm estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of `a`.
///
/// Small matrices (at most 32 columns, or rows) are handled exactly by the
/// Jacobi SVD. Otherwise power iteration on `A^T A` runs from a fixed seeded
/// start until the relative change drops below `tol`; if `max_iter` runs out
/// the last estimate is returned with `converged = false`.
pub fn spectral_norm(a: &DenseMatrix, tol: f64, max_iter: usize) -> Result<NormEstimate> {
    if a.is_empty() {
        return Err(invalid("a", "spectral norm of an empty matrix"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tol", "must be positive"));
    }
    let (m, n) = a.shape();
    if n.min(m) <= EXACT_COLS {
        let svd = if m >= n { jacobi_svd(a)? } else { jacobi_svd(&a.transpose())? };
        return Ok(NormEstimate { value: svd.sigma[0], converged: true, iterations: 0 });
    }

    let mut x = vec![0.0; n];
    GaussianStream::new(START_SEED).fill(&mut x);
    let nx = math::norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; m];
    let mut est = 0.0;
    for it in 1..=max_iter {
        matvec(a, &x, &mut y);
        let next = math::norm2(&y);
        if next == 0.0 {
            return Ok(NormEstimate { value: 0.0, converged: true, iterations: it });
        }
        matvec_t(a, &y, &mut x);
        let nz = math::norm2(&x);
        x.iter_mut().for_each(|v| *v /= nz);
        if (next - est).abs() <= tol * next {
            return Ok(NormEstimate { value: next, converged: true, iterations: it });
        }
        est = next;
    }
    Ok(NormEstimate { value: est, converged: false, iterations: max_iter })
}

/// Spectral norm that never reports an unconverged estimate.
///
/// Golub–Kahan–Lanczos bidiagonalization with full reorthogonalization; the
/// Ritz value is accepted once its residual `β_j |x_j|` drops below
/// `tol · σ`. Unlike the power method this is insensitive to a clustered top
/// of the spectrum. Jacobi SVD covers small inputs and the (unexpected) case
/// of running out of Krylov directions without meeting the tolerance.
pub(crate) fn spectral_norm_strict(a: &DenseMatrix, tol: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(invalid("a", "spectral norm of an empty matrix"));
    }
    let (m, n) = a.shape();
    let exact = |a: &DenseMatrix| -> Result<f64> {
        let svd = if m >= n { jacobi_svd(a)? } else { jacobi_svd(&a.transpose())? };
        Ok(svd.sigma[0])
    };
    if n.min(m) <= EXACT_COLS {
        return exact(a);
    }
    match lanczos_top(a, tol)? {
        Some(s) => Ok(s),
        None => exact(a),
    }
}

fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for b in basis {
            let c = math::dot(b, w);
            math::axpy(-c, b, w);
        }
    }
}

fn lanczos_top(a: &DenseMatrix, tol: f64) -> Result<Option<f64>> {
    let (m, n) = a.shape();
    let steps = n.min(m);
    let mut v = vec![0.0; n];
    GaussianStream::new(START_SEED).fill(&mut v);
    let nv = math::norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut u = vec![0.0; m];
    matvec(a, &v, &mut u);
    for j in 0..steps {
        if j > 0 {
            math::axpy(-beta[j - 1], &us[j - 1], &mut u);
        }
        reorthogonalize(&us, &mut u);
        let aj = math::norm2(&u);
        vs.push(core::mem::take(&mut v));
        alpha.push(aj);
        if aj == 0.0 {
            // Invariant subspace: B_j is exact.
            return Ok(Some(bidiagonal_top(&alpha, &beta)?.0));
        }
        u.iter_mut().for_each(|x| *x /= aj);

        let mut w = vec![0.0; n];
        matvec_t(a, &u, &mut w);
        math::axpy(-aj, &vs[j], &mut w);
        us.push(core::mem::take(&mut u));
        reorthogonalize(&vs, &mut w);
        let bj = math::norm2(&w);

        let (sigma, last) = bidiagonal_top(&alpha, &beta)?;
        if bj * last.abs() <= tol * sigma || bj == 0.0 || sigma == 0.0 {
            return Ok(Some(sigma));
        }
        beta.push(bj);
        w.iter_mut().for_each(|x| *x /= bj);
        v = w;
        u = vec![0.0; m];
        matvec(a, &v, &mut u);
    }
    Ok(None)
}

/// Largest singular value of the upper bidiagonal `diag(alpha) + superdiag(beta)`
/// and the last entry of its left singular vector, through the top eigenpair
/// of the tridiagonal `B Bᵀ`.
fn bidiagonal_top(alpha: &[f64], beta: &[f64]) -> Result<(f64, f64)> {
    let j = alpha.len();
    let diag: Vec<f64> =
        (0..j).map(|i| alpha[i] * alpha[i] + if i + 1 < j { beta[i] * beta[i] } else { 0.0 }).collect();
    let off: Vec<f64> = (0..j.saturating_sub(1)).map(|i| beta[i] * alpha[i + 1]).collect();
    let lambda = tridiagonal_top_eigenvalue(&diag, &off);
    let x = tridiagonal_eigenvector(&diag, &off, lambda);
    Ok((math::sqrt(lambda.max(0.0)), x[j - 1]))
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `mu`.
fn sturm_count(d: &[f64], e: &[f64], mu: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - mu;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - mu - e[i - 1] * e[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_top_eigenvalue(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        hi = hi.max(d[i] + r);
        lo = lo.min(d[i] - r);
    }
    let scale = hi.abs().max(lo.abs());
    if scale == 0.0 {
        return 0.0;
    }
    let pivmin = f64::MIN_POSITIVE * scale.max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * f64::EPSILON * scale || mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid, pivmin) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Unit eigenvector for the (accurate) eigenvalue `lambda` by inverse
/// iteration with a partially pivoted tridiagonal LU.
fn tridiagonal_eigenvector(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let scale = d.iter().chain(e).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;
    // Rows of U carry up to two superdiagonals after pivoting.
    let mut u0: Vec<f64> = d.iter().map(|v| v - lambda).collect();
    let mut u1: Vec<f64> = e.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut mult = vec![0.0; n];
    let mut swapped = vec![false; n];
    let mut sub: Vec<f64> = e.to_vec();
    for i in 0..n - 1 {
        if sub[i].abs() > u0[i].abs() {
            // Swap rows i and i+1.
            swapped[i] = true;
            let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
            u0[i] = sub[i];
            u1[i] = u0[i + 1];
            u2[i] = u1[i + 1];
            let l = a0 / u0[i];
            mult[i] = l;
            u0[i + 1] = a1 - l * u1[i];
            u1[i + 1] = a2 - l * u2[i];
        } else {
            if u0[i] == 0.0 {
                u0[i] = tiny;
            }
            let l = sub[i] / u0[i];
            mult[i] = l;
            u0[i + 1] -= l * u1[i];
            u1[i + 1] -= l * u2[i];
        }
        sub[i] = 0.0;
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    let mut x = vec![1.0; n];
    for _ in 0..3 {
        let mut y = x.clone();
        for i in 0..n - 1 {
            if swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= mult[i] * y[i];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            if i + 1 < n {
                v -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                v -= u2[i] * y[i + 2];
            }
            y[i] = v / u0[i];
        }
        let ny = math::norm2(&y);
        if !(ny.is_finite() && ny > 0.0) {
            break;
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    x
}
