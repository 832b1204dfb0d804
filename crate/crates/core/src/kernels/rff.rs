//! Random Fourier signature features.
//!
//! Each tensor position `p = 1..=L` gets its own random Fourier feature map
//! `phi_p(x) = (cos(W_p x), sin(W_p x)) / sqrt(D)` for the RBF kernel of
//! bandwidth `h` (rows of `W_p` are i.i.d. `N(0, I / h²)`). Replacing the
//! increment inner products of the discrete signature kernel with inner
//! products of feature increments gives an unbiased estimator of the
//! RBF-lifted truncated signature kernel. Three variants are provided:
//!
//! * full tensor features, `sum_m (2D)^m` coordinates;
//! * diagonal projection (DP), one `(R^2)^{⊗m}` tensor per frequency index;
//! * tensor random projection (TRP), `D` Hadamard-product coordinates per level.

use rand::Rng;
use rand_distr::StandardNormal;

use super::signature::tensor_elements;
use super::KernelConfig;
use crate::error::{Error, Result};
use crate::paths::Trajectory;
use crate::rng::{substream, Purpose};

/// `exp(-|u - v|² / (2 h²))`.
pub fn rbf_kernel(u: &[f64], v: &[f64], bandwidth: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-sq / (2.0 * bandwidth * bandwidth)).exp())
}

/// Spectral samples `W_1..W_L`, each `rff_dim x dim`, row-major.
#[derive(Debug, Clone)]
pub struct RffWeights {
    dim: usize,
    rff_dim: usize,
    levels: Vec<Vec<f64>>,
}

impl RffWeights {
    /// Level `p` draws from the stream `(seed, p, RffWeights)`.
    pub fn sample(
        dim: usize,
        rff_dim: usize,
        depth: usize,
        bandwidth: f64,
        seed: u64,
    ) -> Result<Self> {
        if rff_dim == 0 || depth == 0 || dim == 0 {
            return Err(Error::InvalidConfig(
                "rff_dim, level and dimension must all be >= 1".into(),
            ));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let levels = (1..=depth as u64)
            .map(|p| {
                let mut rng = substream(seed, p, Purpose::RffWeights);
                (0..rff_dim * dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) / bandwidth)
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            rff_dim,
            levels,
        })
    }

    pub fn from_config(dim: usize, cfg: &KernelConfig) -> Result<Self> {
        Self::sample(dim, cfg.rff_dim, cfg.level, cfg.bandwidth, cfg.seed)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn rff_dim(&self) -> usize {
        self.rff_dim
    }

    /// Unscaled `(cos(w_q x))_q` followed by `(sin(w_q x))_q` for position `p` (0-based).
    fn raw_features(&self, p: usize, x: &[f64]) -> Vec<f64> {
        let w = &self.levels[p];
        let mut out = vec![0.0; 2 * self.rff_dim];
        for q in 0..self.rff_dim {
            let row = &w[q * self.dim..(q + 1) * self.dim];
            let arg: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            let (s, c) = arg.sin_cos();
            out[q] = c;
            out[self.rff_dim + q] = s;
        }
        out
    }

    /// Feature increments `phi_p(x_{t+1}) - phi_p(x_t)` for every `t`, scaled by `scale`.
    fn increments(&self, p: usize, x: &Trajectory, scale: f64) -> Vec<Vec<f64>> {
        let feats: Vec<Vec<f64>> = x.points().map(|pt| self.raw_features(p, pt)).collect();
        feats
            .windows(2)
            .map(|w| {
                w[1].iter()
                    .zip(&w[0])
                    .map(|(b, a)| (b - a) * scale)
                    .collect()
            })
            .collect()
    }

    fn check(&self, x: &Trajectory) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, x.dim()));
        }
        Ok(())
    }
}

/// Gaussian projection vectors `p^{(m)}_q ~ N(0, I_{2D})`, one set per level.
#[derive(Debug, Clone)]
pub struct TrpProjections {
    rff_dim: usize,
    levels: Vec<Vec<f64>>,
}

impl TrpProjections {
    /// Level `m` draws from the stream `(seed, m, TrpProjection)`.
    pub fn sample(rff_dim: usize, depth: usize, seed: u64) -> Self {
        let levels = (1..=depth as u64)
            .map(|m| {
                let mut rng = substream(seed, m, Purpose::TrpProjection);
                (0..2 * rff_dim * rff_dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        Self { rff_dim, levels }
    }
}

/// Full RFSF features, `sum_{m <= L} (2D)^m` coordinates. Subject to the
/// element budget since the top level alone has `(2D)^L` entries.
pub fn rfsf_features(x: &Trajectory, cfg: &KernelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let weights = RffWeights::from_config(x.dim(), cfg)?;
    rfsf_full_with(x, &weights, super::signature::DEFAULT_ELEMENT_BUDGET)
}

pub fn rfsf_full_with(x: &Trajectory, weights: &RffWeights, budget: u128) -> Result<Vec<f64>> {
    weights.check(x)?;
    let width = 2 * weights.rff_dim;
    let depth = weights.depth();
    let required = tensor_elements(width, depth);
    if required > budget {
        return Err(Error::ElementBudget { required, budget });
    }
    let scale = 1.0 / (weights.rff_dim as f64).sqrt();
    let incs: Vec<Vec<Vec<f64>>> = (0..depth)
        .map(|p| weights.increments(p, x, scale))
        .collect();

    let mut acc: Vec<Vec<f64>> = (0..=depth)
        .map(|m| vec![0.0; width.pow(m as u32)])
        .collect();
    acc[0][0] = 1.0;
    #[allow(clippy::needless_range_loop)]
    for t in 0..x.len() - 1 {
        // Descending so that level m - 1 still holds the sum over earlier steps.
        for m in (1..=depth).rev() {
            let (lower, upper) = acc.split_at_mut(m);
            let (prev, cur) = (&lower[m - 1], &mut upper[0]);
            let z = &incs[m - 1][t];
            for (i, a) in prev.iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (o, zi) in cur[i * width..(i + 1) * width].iter_mut().zip(z) {
                    *o += a * zi;
                }
            }
        }
    }
    Ok(acc.concat())
}

/// Diagonally projected RFSF features, `D (2^{L+1} - 1)` coordinates laid out
/// level by level, frequency index within level.
pub fn rfsf_dp_features(x: &Trajectory, cfg: &KernelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    rfsf_dp_with(x, &RffWeights::from_config(x.dim(), cfg)?)
}

pub fn rfsf_dp_with(x: &Trajectory, weights: &RffWeights) -> Result<Vec<f64>> {
    weights.check(x)?;
    let d = weights.rff_dim;
    let depth = weights.depth();
    let scale = 1.0 / (d as f64).sqrt();
    // Unscaled 2-D increments (cos, sin) per position, step and frequency.
    let incs: Vec<Vec<Vec<f64>>> = (0..depth).map(|p| weights.increments(p, x, 1.0)).collect();

    let mut levels: Vec<Vec<f64>> = (0..=depth).map(|m| Vec::with_capacity(d << m)).collect();
    levels[0] = vec![scale; d];
    let mut acc: Vec<Vec<f64>> = (0..=depth).map(|m| vec![0.0; 1 << m]).collect();
    for q in 0..d {
        acc.iter_mut()
            .for_each(|a| a.iter_mut().for_each(|v| *v = 0.0));
        acc[0][0] = 1.0;
        #[allow(clippy::needless_range_loop)]
        for t in 0..x.len() - 1 {
            for m in (1..=depth).rev() {
                let inc = &incs[m - 1][t];
                let z = [inc[q], inc[d + q]];
                let (lower, upper) = acc.split_at_mut(m);
                let (prev, cur) = (&lower[m - 1], &mut upper[0]);
                for (i, a) in prev.iter().enumerate() {
                    cur[2 * i] += a * z[0];
                    cur[2 * i + 1] += a * z[1];
                }
            }
        }
        for m in 1..=depth {
            levels[m].extend(acc[m].iter().map(|v| v * scale));
        }
    }
    Ok(levels.concat())
}

/// Tensor-random-projected RFSF features, `(L + 1) D` coordinates.
pub fn rfsf_trp_features(x: &Trajectory, cfg: &KernelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let weights = RffWeights::from_config(x.dim(), cfg)?;
    let projections = TrpProjections::sample(cfg.rff_dim, cfg.level, cfg.seed);
    rfsf_trp_with(x, &weights, &projections)
}

pub fn rfsf_trp_with(
    x: &Trajectory,
    weights: &RffWeights,
    projections: &TrpProjections,
) -> Result<Vec<f64>> {
    weights.check(x)?;
    let d = weights.rff_dim;
    let depth = weights.depth();
    if projections.rff_dim != d || projections.levels.len() != depth {
        return Err(Error::InvalidConfig(
            "projection shape does not match the RFF weights".into(),
        ));
    }
    let scale = 1.0 / (d as f64).sqrt();
    // u[m][t][q] = <p^{(m)}_q, dphi_m(x_t)>
    let projected: Vec<Vec<Vec<f64>>> = (0..depth)
        .map(|m| {
            let proj = &projections.levels[m];
            weights
                .increments(m, x, scale)
                .iter()
                .map(|z| {
                    proj.chunks_exact(2 * d)
                        .map(|p| p.iter().zip(z).map(|(a, b)| a * b).sum())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut acc: Vec<Vec<f64>> = (0..=depth).map(|_| vec![0.0; d]).collect();
    acc[0].iter_mut().for_each(|v| *v = 1.0);
    #[allow(clippy::needless_range_loop)]
    for t in 0..x.len() - 1 {
        for m in (1..=depth).rev() {
            let (lower, upper) = acc.split_at_mut(m);
            let u = &projected[m - 1][t];
            for ((o, a), b) in upper[0].iter_mut().zip(&lower[m - 1]).zip(u) {
                *o += a * b;
            }
        }
    }
    Ok(acc.into_iter().flatten().map(|v| v * scale).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
