//! Evaluation of the rank-revealing and subspace-angle bounds of randomized
//! QLP against a concrete sketch.
//!
//! Everything is driven by the rotated sketch `Ω̃ = Uᵀ Ω₁`, where `Ω₁` holds
//! the first `k` columns of the Gaussian matrix used by the factorization and
//! `U` the exact left singular vectors of `A`. With `Ω̃ = [Ω̃₁; Ω̃₂]` split at
//! row `k` and `r = ‖Ω̃₂ Ω̃₁⁻¹‖₂`, `ψ_i = σ_{k+1}/σ_i`:
//!
//! ```text
//! σ_i ≥ σ̂_i ≥ σ_i / sqrt(1 + ψ_i⁴ r²)                    i = 1..k
//! ‖L₂₂‖₂ ≤ σ_{k+1} + ψ_k³ σ₁ r / sqrt(1 + ψ_k⁶ r²)
//! sin θ_Q ≤ ψ_k² r          sin θ_P ≤ ψ_k³ r
//! sin φ_Q ≤ ‖L₂₂‖² / (σ_k(L₁₁)² − ‖L₂₂‖²)
//! sin φ_P ≤ ‖L₂₂‖ / σ_k(L₁₁)                   (φ: only if ‖L₂₂‖ < σ_k(L₁₁))
//! ```

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::decomp::{QlpFactors, SvdFactors};
use crate::error::{invalid, Error, Result};
use crate::kernels::{jacobi_svd, matmul, qr, solve_right_upper, spectral_norm_strict};
use crate::math;
use crate::matrix::DenseMatrix;
use crate::metrics::subspace_distance;
use crate::rng::{gaussian_matrix, GaussianStream};

/// Condition estimate of `Ω̃₁` above which the sketch counts as singular.
pub const MAX_SKETCH_CONDITION: f64 = 1e14;

/// Relative slack used when counting bound violations.
pub const VERIFY_SLACK: f64 = 1e-10;

const NORM_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSplit {
    /// `U_kᵀ Ω₁` (k x k).
    pub omega1_tilde: DenseMatrix,
    /// `U_⊥ᵀ Ω₁` ((n−k) x k).
    pub omega2_tilde: DenseMatrix,
    /// `‖Ω̃₂ Ω̃₁⁻¹‖₂`.
    pub ratio_norm: f64,
}

impl OmegaSplit {
    /// Splits `Uᵀ Ω₁` for an explicitly given sketch head `Ω₁` (m x k).
    pub fn from_head(omega1: &DenseMatrix, u: &DenseMatrix, k: usize) -> Result<Self> {
        let (m, n) = u.shape();
        if omega1.rows() != m || omega1.cols() != k {
            return Err(Error::DimensionMismatch { op: "omega_split", left: u.shape(), right: omega1.shape() });
        }
        if k == 0 || k >= n {
            return Err(invalid("k", alloc::format!("need 1 <= k < n = {n}, got {k}")));
        }
        let rotated = matmul(u, omega1, true, false)?;
        let omega1_tilde = rotated.submatrix(0..k, 0..k);
        let omega2_tilde = rotated.submatrix(k..n, 0..k);
        let ratio_norm = ratio_norm(&omega1_tilde, &omega2_tilde)?;
        Ok(Self { omega1_tilde, omega2_tilde, ratio_norm })
    }
}

/// `‖B A⁻¹‖₂` for square `A`. With `A = Q R`, `B A⁻¹ = (B R⁻¹) Qᵀ`, so the
/// norm is that of `Y` solving `Y R = B`.
pub fn ratio_norm(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    let f = qr(a)?;
    let diag: Vec<f64> = f.r.diag().into_iter().map(f64::abs).collect();
    let hi = diag.iter().cloned().fold(0.0, f64::max);
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo == 0.0 || hi / lo > MAX_SKETCH_CONDITION {
        return Err(Error::SingularSketch { condition: if lo == 0.0 { f64::INFINITY } else { hi / lo } });
    }
    if b.rows() == 0 {
        return Ok(0.0);
    }
    let y = solve_right_upper(b, &f.r);
    spectral_norm_strict(&y, NORM_TOL)
}

/// Regenerates Ω (m x n) from `seed`, keeps its first `k` columns and splits `Uᵀ Ω₁`.
pub fn omega_split(seed: u64, m: usize, n: usize, k: usize, u: &DenseMatrix) -> Result<OmegaSplit> {
    if u.shape() != (m, n) {
        return Err(Error::DimensionMismatch { op: "omega_split", left: (m, n), right: u.shape() });
    }
    if k == 0 || k >= n {
        return Err(invalid("k", alloc::format!("need 1 <= k < n = {n}, got {k}")));
    }
    let head = gaussian_matrix(&mut GaussianStream::new(seed), m, k);
    OmegaSplit::from_head(&head, u, k)
}

/// The four canonical-angle sines: `(U_k, Q₁)`, `(V_k, P₁)`, `(U_⊥, Q₂)`, `(V_⊥, P₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub theta_q: f64,
    pub theta_p: f64,
    pub phi_q: f64,
    pub phi_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub seed: u64,
    pub ratio_norm: f64,
    /// `σ_{k+1}/σ_i`, i = 1..k.
    pub psi: Vec<f64>,
    /// Oracle `σ_1..σ_k` (upper side of the sandwich).
    pub sv_upper: Vec<f64>,
    pub sv_lower: Vec<f64>,
    /// Leading `k` of |diag(L)| sorted nonincreasing.
    pub sv_measured: Vec<f64>,
    /// Singular values of L₁₁.
    pub sv_l11: Vec<f64>,
    /// Positions i ≤ k where the raw (unsorted) |L_ii| falls outside the sandwich.
    pub raw_order_violations: usize,
    pub l22_bound: f64,
    pub l22_measured: f64,
    pub sigma_k_l11: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_bounds: Option<AngleSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_measured: Option<AngleSet>,
    /// Whether `‖L₂₂‖₂ < σ_k(L₁₁)`, the hypothesis of the φ bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub applicable_phi: Option<bool>,
    /// The φ_Q bound exceeds 1 and holds trivially.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_q_vacuous: Option<bool>,
    /// Sine of the largest angle between `U_k` and the range of the rank-k
    /// approximation `Q [L₁₁; L₂₁]`, the subspace the φ_Q argument controls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_q_range: Option<f64>,
}

/// Which quantities the bounds are checked against.
///
/// `Stated` pairs the sandwich with sorted |diag(L)| and φ_Q with
/// `(U_⊥, Q₂)`. `Proved` uses what the derivations actually control: the
/// singular values of `L₁₁`, and for φ_Q the range of `Q [L₁₁; L₂₁]`.
/// The other bounds read the same either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    #[default]
    Stated,
    Proved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub what: String,
    pub measured: f64,
    pub bound: f64,
}

impl BoundReport {
    /// Lower and upper sandwich violations for the chosen reading of σ̂.
    pub fn sv_violations(&self, reading: Reading, slack: f64) -> Vec<Violation> {
        let (values, label) = match reading {
            Reading::Stated => (&self.sv_measured, "diag"),
            Reading::Proved => (&self.sv_l11, "sv(L11)"),
        };
        let mut out = Vec::new();
        for (i, ((&v, &lo), &hi)) in values.iter().zip(&self.sv_lower).zip(&self.sv_upper).enumerate() {
            if v < lo - slack * hi {
                out.push(Violation { what: alloc::format!("{label} lower i={}", i + 1), measured: v, bound: lo });
            }
            if v > hi * (1.0 + slack) {
                out.push(Violation { what: alloc::format!("{label} upper i={}", i + 1), measured: v, bound: hi });
            }
        }
        out
    }

    pub fn l22_violation(&self, slack: f64) -> Option<Violation> {
        let scale = self.sv_upper.first().copied().unwrap_or(0.0);
        (self.l22_measured > self.l22_bound + slack * scale).then(|| Violation {
            what: String::from("L22"),
            measured: self.l22_measured,
            bound: self.l22_bound,
        })
    }

    /// Angle violations; φ bounds are skipped unless their hypothesis holds.
    pub fn angle_violations(&self, reading: Reading, slack: f64) -> Vec<Violation> {
        let (Some(b), Some(m)) = (self.angle_bounds, self.angle_measured) else {
            return Vec::new();
        };
        let mut pairs = alloc::vec![("sin theta_Q", m.theta_q, b.theta_q), ("sin theta_P", m.theta_p, b.theta_p)];
        if self.applicable_phi == Some(true) {
            let phi_q = match (reading, self.phi_q_range) {
                (Reading::Proved, Some(range)) => range,
                _ => m.phi_q,
            };
            pairs.push(("sin phi_Q", phi_q, b.phi_q));
            pairs.push(("sin phi_P", m.phi_p, b.phi_p));
        }
        pairs
            .into_iter()
            .filter(|(_, meas, bound)| *meas > bound + slack)
            .map(|(what, measured, bound)| Violation { what: String::from(what), measured, bound })
            .collect()
    }

    /// Every violation under `reading`.
    pub fn violations(&self, reading: Reading, slack: f64) -> Vec<Violation> {
        let mut v = self.sv_violations(reading, slack);
        v.extend(self.l22_violation(slack));
        v.extend(self.angle_violations(reading, slack));
        v
    }
}

struct Context {
    k: usize,
    seed: u64,
    split: OmegaSplit,
}

fn prepare(a: &DenseMatrix, f: &QlpFactors, svd: &SvdFactors, k: usize) -> Result<Context> {
    let (m, n) = a.shape();
    let seed = f.seed.ok_or(Error::NotApplicable("bounds need the sketch seed; these factors are deterministic"))?;
    if f.q.shape() != (m, n) || f.l.shape() != (n, n) || svd.u.shape() != (m, n) || svd.sigma.len() != n {
        return Err(Error::DimensionMismatch { op: "bounds", left: a.shape(), right: svd.u.shape() });
    }
    if k == 0 || k >= n {
        return Err(invalid("k", alloc::format!("need 1 <= k < n = {n}, got {k}")));
    }
    if svd.sigma[k - 1].is_nan() || svd.sigma[k - 1] <= 0.0 {
        return Err(Error::NotApplicable("sigma_k is zero; the bounds need rank >= k"));
    }
    let split = omega_split(seed, m, n, k, &svd.u)?;
    Ok(Context { k, seed, split })
}

/// Singular value sandwich and the L₂₂ bound.
pub fn check_theorem1(a: &DenseMatrix, f: &QlpFactors, svd: &SvdFactors, k: usize) -> Result<BoundReport> {
    let ctx = prepare(a, f, svd, k)?;
    Ok(theorem1(&ctx, f, svd)?.0)
}

fn theorem1(ctx: &Context, f: &QlpFactors, svd: &SvdFactors) -> Result<(BoundReport, DenseMatrix)> {
    let k = ctx.k;
    let r = ctx.split.ratio_norm;
    let sigma = &svd.sigma;
    let next = sigma[k];
    let psi: Vec<f64> = sigma[..k].iter().map(|s| next / s).collect();
    let sv_lower: Vec<f64> =
        sigma[..k].iter().zip(&psi).map(|(s, p)| s / math::sqrt(1.0 + math::powi(*p, 4) * r * r)).collect();
    let psi_k = psi[k - 1];
    let l22_bound = next + math::powi(psi_k, 3) * sigma[0] * r / math::sqrt(1.0 + math::powi(psi_k, 6) * r * r);

    let sorted = f.sorted_estimates();
    let raw: Vec<f64> = f.diag_estimates().into_iter().map(f64::abs).collect();
    let raw_order_violations = (0..k)
        .filter(|&i| raw[i] < sv_lower[i] - VERIFY_SLACK * sigma[i] || raw[i] > sigma[i] * (1.0 + VERIFY_SLACK))
        .count();

    let l11 = f.l11(k);
    let sv_l11 = jacobi_svd(&l11)?.sigma;
    let l22 = f.l22(k);
    let l22_measured = spectral_norm_strict(&l22, NORM_TOL)?;

    let report = BoundReport {
        k,
        seed: ctx.seed,
        ratio_norm: r,
        psi,
        sv_upper: sigma[..k].to_vec(),
        sv_lower,
        sv_measured: sorted[..k].to_vec(),
        sigma_k_l11: sv_l11[k - 1],
        sv_l11,
        raw_order_violations,
        l22_bound,
        l22_measured,
        angle_bounds: None,
        angle_measured: None,
        applicable_phi: None,
        phi_q_vacuous: None,
        phi_q_range: None,
    };
    Ok((report, l22))
}

/// Canonical-angle bounds for all four subspaces (fills the angle fields).
pub fn check_theorem2(a: &DenseMatrix, f: &QlpFactors, svd: &SvdFactors, k: usize) -> Result<BoundReport> {
    verify_bounds(a, f, svd, k)
}

/// Singular value, L₂₂ and angle bounds in one report.
pub fn verify_bounds(a: &DenseMatrix, f: &QlpFactors, svd: &SvdFactors, k: usize) -> Result<BoundReport> {
    let ctx = prepare(a, f, svd, k)?;
    let (mut report, _) = theorem1(&ctx, f, svd)?;
    let r = ctx.split.ratio_norm;
    let psi_k = report.psi[k - 1];
    let l22 = report.l22_measured;
    let smin = report.sigma_k_l11;
    let applicable = l22 < smin;
    let phi_q = if applicable { l22 * l22 / (smin * smin - l22 * l22) } else { f64::INFINITY };
    let phi_p = if smin > 0.0 { l22 / smin } else { f64::INFINITY };
    report.angle_bounds =
        Some(AngleSet { theta_q: psi_k * psi_k * r, theta_p: math::powi(psi_k, 3) * r, phi_q, phi_p });
    report.angle_measured = Some(AngleSet {
        theta_q: subspace_distance(&svd.u_k(k), &f.q1(k))?,
        theta_p: subspace_distance(&svd.v_k(k), &f.p1(k))?,
        phi_q: subspace_distance(&svd.u_perp(k), &f.q2(k))?,
        phi_p: subspace_distance(&svd.v_perp(k), &f.p2(k))?,
    });
    let approx_range = qr(&matmul(&f.q, &f.l.columns(0..k), false, false)?)?.q;
    report.phi_q_range = Some(subspace_distance(&svd.u_k(k), &approx_range)?);
    report.applicable_phi = Some(applicable);
    report.phi_q_vacuous = Some(phi_q > 1.0);
    Ok(report)
}
