//! Cache-blocked matrix multiply on column-major views.
//!
//! Panels of `op(A)` and `op(B)` are packed into contiguous micro-panels
//! (MR rows / NR columns wide) and an MR x NR register block is accumulated
//! per micro-panel pair. Transposition is folded into packing.

use alloc::vec;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::DenseMatrix;

const MR: usize = 8;
const NR: usize = 4;
const KC: usize = 256;
const MC: usize = 128;
const NC: usize = 2048;

/// Below this many multiply-adds the packing overhead is not worth it.
const SMALL: usize = 16 * 1024;

/// Read-only column-major view, optionally transposed.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    data: &'a [f64],
    ld: usize,
    /// Logical shape after transposition.
    rows: usize,
    cols: usize,
    trans: bool,
}

impl<'a> View<'a> {
    pub(crate) fn new(data: &'a [f64], stored_rows: usize, stored_cols: usize, ld: usize, trans: bool) -> Self {
        debug_assert!(stored_cols == 0 || data.len() >= ld * (stored_cols - 1) + stored_rows);
        let (rows, cols) = if trans { (stored_cols, stored_rows) } else { (stored_rows, stored_cols) };
        Self { data, ld, rows, cols, trans }
    }

    pub(crate) fn of(m: &'a DenseMatrix, trans: bool) -> Self {
        Self::new(m.as_slice(), m.rows(), m.cols(), m.rows().max(1), trans)
    }

    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> f64 {
        if self.trans {
            self.data[j + i * self.ld]
        } else {
            self.data[i + j * self.ld]
        }
    }
}

/// `C = alpha * op(A) * op(B) + beta * C` where C is `a.rows x b.cols` stored
/// column-major in `c` with leading dimension `ldc`.
pub(crate) fn gemm(alpha: f64, a: View<'_>, b: View<'_>, beta: f64, c: &mut [f64], ldc: usize) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    debug_assert_eq!(b.rows, k);
    if m == 0 || n == 0 {
        return;
    }
    if beta != 1.0 {
        for j in 0..n {
            let col = &mut c[j * ldc..j * ldc + m];
            if beta == 0.0 {
                col.fill(0.0);
            } else {
                col.iter_mut().for_each(|v| *v *= beta);
            }
        }
    }
    if k == 0 || alpha == 0.0 {
        return;
    }
    if m * n * k <= SMALL {
        gemm_small(alpha, a, b, c, ldc);
        return;
    }

    let mut apack = vec![0.0; MC * KC];
    let nc_max = NC.min(n.div_ceil(NR) * NR);
    let mut bpack = vec![0.0; KC * nc_max];

    for jc in (0..n).step_by(NC) {
        let nc = NC.min(n - jc);
        for pc in (0..k).step_by(KC) {
            let kc = KC.min(k - pc);
            pack_b(b, pc, kc, jc, nc, &mut bpack);
            for ic in (0..m).step_by(MC) {
                let mc = MC.min(m - ic);
                pack_a(a, ic, mc, pc, kc, &mut apack);
                for jr in (0..nc).step_by(NR) {
                    let nr = NR.min(nc - jr);
                    let bp = &bpack[(jr / NR) * kc * NR..(jr / NR + 1) * kc * NR];
                    for ir in (0..mc).step_by(MR) {
                        let mr = MR.min(mc - ir);
                        let ap = &apack[(ir / MR) * kc * MR..(ir / MR + 1) * kc * MR];
                        let acc = micro_kernel(kc, ap, bp);
                        for (jj, acc_col) in acc.iter().enumerate().take(nr) {
                            let base = (jc + jr + jj) * ldc + ic + ir;
                            let dst = &mut c[base..base + mr];
                            for (d, v) in dst.iter_mut().zip(acc_col) {
                                *d += alpha * v;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn gemm_small(alpha: f64, a: View<'_>, b: View<'_>, c: &mut [f64], ldc: usize) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    for j in 0..n {
        for p in 0..k {
            let bpj = alpha * b.at(p, j);
            if bpj == 0.0 {
                continue;
            }
            let dst = &mut c[j * ldc..j * ldc + m];
            if a.trans {
                for (i, d) in dst.iter_mut().enumerate() {
                    *d += a.data[p + i * a.ld] * bpj;
                }
            } else {
                math::axpy(bpj, &a.data[p * a.ld..p * a.ld + m], dst);
            }
        }
    }
}

fn pack_a(a: View<'_>, ic: usize, mc: usize, pc: usize, kc: usize, out: &mut [f64]) {
    for (strip, i0) in (0..mc).step_by(MR).enumerate() {
        let mr = MR.min(mc - i0);
        let dst = &mut out[strip * kc * MR..(strip + 1) * kc * MR];
        for p in 0..kc {
            let row = &mut dst[p * MR..p * MR + MR];
            if !a.trans && mr == MR {
                let off = ic + i0 + (pc + p) * a.ld;
                row.copy_from_slice(&a.data[off..off + MR]);
            } else {
                for (ii, r) in row.iter_mut().enumerate() {
                    *r = if ii < mr { a.at(ic + i0 + ii, pc + p) } else { 0.0 };
                }
            }
        }
    }
}

fn pack_b(b: View<'_>, pc: usize, kc: usize, jc: usize, nc: usize, out: &mut [f64]) {
    for (strip, j0) in (0..nc).step_by(NR).enumerate() {
        let nr = NR.min(nc - j0);
        let dst = &mut out[strip * kc * NR..(strip + 1) * kc * NR];
        for jj in 0..NR {
            if jj < nr {
                let j = jc + j0 + jj;
                if b.trans {
                    for p in 0..kc {
                        dst[p * NR + jj] = b.data[j + (pc + p) * b.ld];
                    }
                } else {
                    let col = &b.data[j * b.ld + pc..j * b.ld + pc + kc];
                    for (p, v) in col.iter().enumerate() {
                        dst[p * NR + jj] = *v;
                    }
                }
            } else {
                for p in 0..kc {
                    dst[p * NR + jj] = 0.0;
                }
            }
        }
    }
}

#[inline(always)]
fn micro_kernel(kc: usize, a: &[f64], b: &[f64]) -> [[f64; MR]; NR] {
    let mut acc = [[0.0f64; MR]; NR];
    for (ap, bp) in a.chunks_exact(MR).zip(b.chunks_exact(NR)).take(kc) {
        let ap: &[f64; MR] = ap.try_into().unwrap();
        let bp: &[f64; NR] = bp.try_into().unwrap();
        for j in 0..NR {
            let bj = bp[j];
            for i in 0..MR {
                acc[j][i] += ap[i] * bj;
            }
        }
    }
    acc
}

/// Product `op(A) * op(B)` with optional transposition of either operand.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix, transpose_a: bool, transpose_b: bool) -> Result<DenseMatrix> {
    let av = View::of(a, transpose_a);
    let bv = View::of(b, transpose_b);
    if av.cols != bv.rows {
        let shape = |m: &DenseMatrix, t: bool| if t { (m.cols(), m.rows()) } else { m.shape() };
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left: shape(a, transpose_a),
            right: shape(b, transpose_b),
        });
    }
    let mut c = DenseMatrix::zeros(av.rows, bv.cols);
    let ldc = av.rows.max(1);
    gemm(1.0, av, bv, 0.0, c.as_mut_slice(), ldc);
    Ok(c)
}

/// `y = A x`.
pub(crate) fn matvec(a: &DenseMatrix, x: &[f64], y: &mut [f64]) {
    y.fill(0.0);
    for (j, xj) in x.iter().enumerate() {
        if *xj != 0.0 {
            math::axpy(*xj, a.col(j), y);
        }
    }
}

/// `y = A^T x`.
pub(crate) fn matvec_t(a: &DenseMatrix, x: &[f64], y: &mut [f64]) {
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = math::dot(a.col(j), x);
    }
}
