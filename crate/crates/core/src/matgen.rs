//! Synthetic test matrices `A = U Σ Vᵀ (+ noise)` with known factors.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::decomp::SvdFactors;
use crate::error::{invalid, Result};
use crate::kernels::{matmul, qr};
use crate::math;
use crate::matrix::DenseMatrix;
use crate::rng::{gaussian_matrix, GaussianStream};

pub const DEFAULT_NOISE_LEVEL: f64 = 0.05;
pub const DEFAULT_RAMP_END: f64 = 1e-3;
pub const S_SHAPE_FLOOR: f64 = 0.01;

/// RNG domain of [`build`], kept apart from the sketch streams.
pub const MATGEN_DOMAIN: u64 = 0x6d61_7467_656e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    /// Linear ramp over the first `k` values, zero tail, plus Gaussian noise.
    NoisyLowRank,
    /// `σ_i = i^-2`.
    FastDecay,
    /// Plateau near 1, steep drop, floor at 0.01.
    SShaped,
    /// Affine between `params[0]` and `params[1]`.
    Linear,
    /// `params` is the spectrum itself.
    Custom,
}

/// Scaling applied to the i.i.d. N(0, 1) noise matrix before `noise_level * σ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseNormalization {
    /// Entries N(0, 1/n) halved, so the spectral norm is close to 1.
    #[default]
    Spectral,
    /// Divided by the Frobenius norm.
    Frobenius,
    /// Raw N(0, 1) entries.
    Entry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    /// Matrix order.
    pub n: usize,
    /// Rank / gap index, required by `noisy-low-rank`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Noise multiplier; `None` means the kind default (0.05 for noisy-low-rank, 0 otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
    #[serde(default)]
    pub normalization: NoiseNormalization,
    /// noisy-low-rank: `[ramp_end]`; s-shaped: `[steepness]`; linear: `[first, last]`;
    /// custom: the full spectrum.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl SpectrumSpec {
    pub fn noisy_low_rank(n: usize, k: usize) -> Self {
        Self::plain(SpectrumKind::NoisyLowRank, n, Some(k), Vec::new())
    }

    pub fn fast_decay(n: usize) -> Self {
        Self::plain(SpectrumKind::FastDecay, n, None, Vec::new())
    }

    pub fn s_shaped(n: usize) -> Self {
        Self::plain(SpectrumKind::SShaped, n, None, Vec::new())
    }

    pub fn linear(n: usize, first: f64, last: f64) -> Self {
        Self::plain(SpectrumKind::Linear, n, None, alloc::vec![first, last])
    }

    pub fn custom(sigma: Vec<f64>) -> Self {
        Self::plain(SpectrumKind::Custom, sigma.len(), None, sigma)
    }

    fn plain(kind: SpectrumKind, n: usize, k: Option<usize>, params: Vec<f64>) -> Self {
        Self { kind, n, k, noise_level: None, normalization: NoiseNormalization::default(), params }
    }

    pub fn with_noise(mut self, level: f64) -> Self {
        self.noise_level = Some(level);
        self
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = params;
        self
    }

    pub fn effective_noise(&self) -> f64 {
        self.noise_level.unwrap_or(match self.kind {
            SpectrumKind::NoisyLowRank => DEFAULT_NOISE_LEVEL,
            _ => 0.0,
        })
    }

    /// Checks the spec and returns the noiseless singular values.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let n = self.n;
        if n < 2 {
            return Err(invalid("n", "matrix order must be at least 2"));
        }
        let noise = self.effective_noise();
        if !noise.is_finite() || noise < 0.0 {
            return Err(invalid("noise_level", "must be finite and nonnegative"));
        }
        if let Some(k) = self.k {
            if k == 0 || k >= n {
                return Err(invalid("k", alloc::format!("need 1 <= k < n = {n}, got {k}")));
            }
        }
        let sigma: Vec<f64> = match self.kind {
            SpectrumKind::NoisyLowRank => {
                let k = self.k.ok_or_else(|| invalid("k", "noisy-low-rank needs a rank k"))?;
                let end = self.params.first().copied().unwrap_or(DEFAULT_RAMP_END);
                if !(end > 0.0 && end <= 1.0) {
                    return Err(invalid("params", "ramp end must lie in (0, 1]"));
                }
                (0..n)
                    .map(|i| {
                        if i >= k {
                            0.0
                        } else if k == 1 {
                            1.0
                        } else {
                            1.0 + (end - 1.0) * i as f64 / (k - 1) as f64
                        }
                    })
                    .collect()
            }
            SpectrumKind::FastDecay => (1..=n).map(|i| 1.0 / (i as f64 * i as f64)).collect(),
            SpectrumKind::SShaped => {
                let steep = self.params.first().copied().unwrap_or(10.0 / n as f64);
                if !steep.is_finite() || steep <= 0.0 {
                    return Err(invalid("params", "steepness must be positive"));
                }
                let mid = n as f64 / 2.0;
                let g = |i: usize| 1.0 / (1.0 + math::exp(steep * (i as f64 - mid)));
                let (top, bottom) = (g(1), g(n));
                // Logistic rescaled so that σ_1 = 1 and σ_n = floor exactly.
                (1..=n).map(|i| S_SHAPE_FLOOR + (1.0 - S_SHAPE_FLOOR) * (g(i) - bottom) / (top - bottom)).collect()
            }
            SpectrumKind::Linear => {
                let [first, last] = match self.params.as_slice() {
                    [a, b] => [*a, *b],
                    _ => return Err(invalid("params", "linear needs [first, last]")),
                };
                (0..n).map(|i| first + (last - first) * i as f64 / (n - 1) as f64).collect()
            }
            SpectrumKind::Custom => {
                if self.params.len() != n {
                    return Err(invalid("params", alloc::format!("custom spectrum needs {n} values")));
                }
                self.params.clone()
            }
        };
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(invalid("params", "singular values must be finite and nonnegative"));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("params", "singular values must be nonincreasing"));
        }
        Ok(sigma)
    }
}

/// A generated matrix with the factors of its noiseless part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestMatrix {
    pub a: DenseMatrix,
    pub u_true: DenseMatrix,
    pub sigma_true: Vec<f64>,
    pub v_true: DenseMatrix,
    pub spec: SpectrumSpec,
    pub seed: u64,
}

impl TestMatrix {
    /// Exact SVD of `a`, available only when no noise was added.
    pub fn exact_svd(&self) -> Option<SvdFactors> {
        (self.spec.effective_noise() == 0.0).then(|| SvdFactors {
            u: self.u_true.clone(),
            sigma: self.sigma_true.clone(),
            v: self.v_true.clone(),
        })
    }
}

/// Haar-distributed orthogonal matrix: Q factor of a Gaussian matrix with
/// nonnegative diagonal in R.
///
/// Order 1 is normalized to `[[1]]`.
pub fn random_orthogonal(stream: &mut GaussianStream, n: usize) -> DenseMatrix {
    if n == 1 {
        return DenseMatrix::identity(1);
    }
    let g = gaussian_matrix(stream, n, n);
    qr(&g).expect("square input").q
}

/// Builds the matrix described by `spec`. Draws U, then V, then the noise from one stream.
pub fn build(spec: &SpectrumSpec, seed: u64) -> Result<TestMatrix> {
    let sigma = spec.spectrum()?;
    let n = spec.n;
    let mut stream = GaussianStream::with_domain(seed, MATGEN_DOMAIN);
    let u = random_orthogonal(&mut stream, n);
    let v = random_orthogonal(&mut stream, n);
    let mut us = u.clone();
    us.scale_columns(&sigma);
    let mut a = matmul(&us, &v, false, true)?;

    let level = spec.effective_noise();
    if level > 0.0 {
        let mut noise = gaussian_matrix(&mut stream, n, n);
        let scale = match spec.normalization {
            NoiseNormalization::Spectral => 0.5 / math::sqrt(n as f64),
            NoiseNormalization::Frobenius => 1.0 / noise.frobenius_norm(),
            NoiseNormalization::Entry => 1.0,
        };
        noise.scale(scale);
        // σ_k of the ramp; with no k the largest value sets the scale.
        let anchor = spec.k.map_or(sigma[0], |k| sigma[k - 1]);
        a.add_scaled(level * anchor, &noise)?;
    }
    Ok(TestMatrix { a, u_true: u, sigma_true: sigma, v_true: v, spec: spec.clone(), seed })
}
