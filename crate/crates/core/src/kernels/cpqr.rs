use alloc::vec::Vec;

use super::qr::{apply_reflector, form_q, make_reflector, normalize_signs, upper_triangle, DEFAULT_BLOCK_SIZE};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::DenseMatrix;

/// Downdated norms below this fraction of their last exact value are recomputed.
const RECOMPUTE_FRACTION: f64 = 0.1;

/// Column-pivoted QR factors `A Π = Q R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpqrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    /// Column `j` of `A Π` is column `perm[j]` of `A`.
    pub perm: Vec<usize>,
}

impl CpqrFactors {
    /// Permutation as an explicit `n x n` matrix Π.
    pub fn perm_matrix(&self) -> DenseMatrix {
        let n = self.perm.len();
        let mut p = DenseMatrix::zeros(n, n);
        for (j, &src) in self.perm.iter().enumerate() {
            p[(src, j)] = 1.0;
        }
        p
    }
}

/// Householder QR with column pivoting on the largest remaining column norm.
///
/// Trailing norms are downdated after each step and recomputed exactly once
/// they fall below a tenth of their last exact value. Ties go to the lowest
/// column index.
pub fn cpqr(a: &DenseMatrix) -> Result<CpqrFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::NotTall { op: "cpqr", rows: m, cols: n });
    }
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut running: Vec<f64> = (0..n).map(|j| math::norm2(work.col(j))).collect();
    let mut exact = running.clone();
    let mut tau = alloc::vec![0.0; n];

    for i in 0..n {
        let mut pvt = i;
        for j in i + 1..n {
            if running[j] > running[pvt] {
                pvt = j;
            }
        }
        if pvt != i {
            work.swap_cols(i, pvt);
            perm.swap(i, pvt);
            running.swap(i, pvt);
            exact.swap(i, pvt);
        }

        tau[i] = make_reflector(&mut work.col_mut(i)[i..]);
        for j in i + 1..n {
            let (vi, cj) = work.col_pair_mut(i, j);
            apply_reflector(tau[i], &vi[i + 1..], &mut cj[i..]);
        }

        for j in i + 1..n {
            if running[j] == 0.0 {
                continue;
            }
            let ratio = work[(i, j)].abs() / running[j];
            let shrink = (1.0 - ratio * ratio).max(0.0);
            running[j] *= math::sqrt(shrink);
            if running[j] < RECOMPUTE_FRACTION * exact[j] {
                running[j] = math::norm2(&work.col(j)[i + 1..]);
                exact[j] = running[j];
            }
        }
    }

    let mut q = form_q(&work, &tau, DEFAULT_BLOCK_SIZE);
    let mut r = upper_triangle(&work);
    normalize_signs(&mut q, &mut r);
    Ok(CpqrFactors { q, r, perm })
}
