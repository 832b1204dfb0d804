use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::pde::sig_kernel_pde;
use super::rff::{dot, rfsf_dp_with, rfsf_trp_with, RffWeights, TrpProjections};
use super::truncated::sig_kernel_truncated;
use super::{Backend, KernelConfig};
use crate::error::{Error, Result};
use crate::paths::Trajectory;

/// Paths longer than this (in 1-variation) trigger a prescale warning.
pub const PRESCALE_WARNING_VARIATION: f64 = 20.0;

const SYMMETRY_TOL: f64 = 1e-12;
const NORMALIZED_BOUND_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-8;

/// Symmetric `n x n` similarity matrix with one id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    ids: Vec<String>,
    normalized: bool,
    raw_diagonal: Option<Vec<f64>>,
}

impl GramMatrix {
    /// Validates shape, finiteness, symmetry and (when `normalized`) a unit
    /// diagonal with entries bounded by one.
    pub fn new(entries: DMatrix<f64>, ids: Vec<String>, normalized: bool) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidGram(format!(
                "expected a nonempty square matrix, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if ids.len() != n {
            return Err(Error::InvalidGram(format!(
                "{} ids for {n} rows",
                ids.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGram("non-finite entry".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidGram(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        if normalized {
            if let Some(i) = (0..n).find(|&i| entries[(i, i)] != 1.0) {
                return Err(Error::InvalidGram(format!(
                    "normalized Gram has diagonal entry {} at {i}",
                    entries[(i, i)]
                )));
            }
            if entries.iter().any(|v| v.abs() > 1.0 + NORMALIZED_BOUND_TOL) {
                return Err(Error::InvalidGram(
                    "normalized Gram has an entry outside [-1, 1]".into(),
                ));
            }
        }
        Ok(Self {
            entries,
            ids,
            normalized,
            raw_diagonal: None,
        })
    }

    /// Gram from nested rows with ids `"0", "1", ...`.
    pub fn from_rows(rows: &[Vec<f64>], normalized: bool) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGram("rows must form a square matrix".into()));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(entries, (0..n).map(|i| i.to_string()).collect(), normalized)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
            ids: (0..n).map(|i| i.to_string()).collect(),
            normalized: true,
            raw_diagonal: None,
        }
    }

    /// Divides by `sqrt(K_ii K_jj)` and pins the diagonal to exactly one.
    /// Raw self-kernels are kept for diagnostics.
    pub fn normalize_raw(raw: DMatrix<f64>, ids: Vec<String>) -> Result<Self> {
        let n = raw.nrows();
        let diag: Vec<f64> = (0..n).map(|i| raw[(i, i)]).collect();
        if let Some(i) = diag.iter().position(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidGram(format!(
                "self-kernel of '{}' is {}, cannot normalize",
                ids.get(i).map_or("?", String::as_str),
                diag[i]
            )));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else {
                raw[(i, j)] / (diag[i] * diag[j]).sqrt()
            }
        });
        let mut gram = Self::new(entries, ids, true)?;
        gram.raw_diagonal = Some(diag);
        Ok(gram)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Self-kernels before normalization, when this Gram was computed here.
    pub fn raw_diagonal(&self) -> Option<&[f64]> {
        self.raw_diagonal.as_deref()
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            self.entries[(indices[a], indices[b])]
        })
    }

    /// Simultaneous row/column permutation: row `k` of the result is row
    /// `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n()];
        if order.len() != self.n()
            || order
                .iter()
                .any(|&i| i >= self.n() || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidSubset("not a permutation".into()));
        }
        Ok(Self {
            entries: self.submatrix(order),
            ids: order.iter().map(|&i| self.ids[i].clone()).collect(),
            normalized: self.normalized,
            raw_diagonal: self
                .raw_diagonal
                .as_ref()
                .map(|d| order.iter().map(|&i| d[i]).collect()),
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Fails if the smallest eigenvalue is below `-1e-8`.
    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }
}

/// Pairwise kernel matrix of `dataset` under `cfg`. Only the upper triangle is
/// evaluated; pairs run in parallel and are written back by index.
pub fn gram(dataset: &[Trajectory], cfg: &KernelConfig) -> Result<GramMatrix> {
    cfg.validate()?;
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let dim = first.dim();
    if let Some(t) = dataset.iter().find(|t| t.dim() != dim) {
        return Err(Error::DimensionMismatch(dim, t.dim()));
    }
    let max_variation = dataset
        .iter()
        .map(Trajectory::one_variation)
        .fold(0.0, f64::max);
    if max_variation > PRESCALE_WARNING_VARIATION {
        log::warn!(
            "largest path 1-variation is {max_variation:.3} (> {PRESCALE_WARNING_VARIATION}); \
             kernel values grow exponentially in it, consider a prescale below 1"
        );
    }

    let n = dataset.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let with_ids = |i: usize, j: usize, e: Error| Error::Pair {
        left: dataset[i].id().to_string(),
        right: dataset[j].id().to_string(),
        source: Box::new(e),
    };

    let values: Vec<Result<f64>> = match cfg.backend {
        Backend::Pde | Backend::TruncatedDp => pairs
            .par_iter()
            .map(|&(i, j)| {
                let (x, y) = (&dataset[i], &dataset[j]);
                let v = match cfg.backend {
                    Backend::Pde => sig_kernel_pde(x, y, cfg.pde_refinement),
                    _ => sig_kernel_truncated(x, y, cfg.level),
                };
                v.map_err(|e| with_ids(i, j, e))
            })
            .collect(),
        Backend::RfsfDp | Backend::RfsfTrp => {
            let weights = RffWeights::from_config(dim, cfg)?;
            let projections = (cfg.backend == Backend::RfsfTrp)
                .then(|| TrpProjections::sample(cfg.rff_dim, cfg.level, cfg.seed));
            let features = dataset
                .par_iter()
                .map(|x| match &projections {
                    Some(p) => rfsf_trp_with(x, &weights, p),
                    None => rfsf_dp_with(x, &weights),
                })
                .collect::<Result<Vec<_>>>()?;
            pairs
                .par_iter()
                .map(|&(i, j)| Ok(dot(&features[i], &features[j])))
                .collect()
        }
    };

    let mut raw = DMatrix::zeros(n, n);
    for (&(i, j), value) in pairs.iter().zip(values) {
        let v = value?;
        if !v.is_finite() {
            return Err(with_ids(
                i,
                j,
                Error::NonFinite {
                    context: format!("{} kernel", cfg.backend),
                },
            ));
        }
        raw[(i, j)] = v;
        raw[(j, i)] = v;
    }
    let ids = dataset.iter().map(|t| t.id().to_string()).collect();
    if cfg.normalize {
        GramMatrix::normalize_raw(raw, ids)
    } else {
        let diag: Vec<f64> = (0..n).map(|i| raw[(i, i)]).collect();
        if let Some(i) = diag.iter().position(|d| *d <= 0.0) {
            return Err(Error::InvalidGram(format!(
                "self-kernel of '{}' is {}",
                dataset[i].id(),
                diag[i]
            )));
        }
        let mut gram = GramMatrix::new(raw, ids, false)?;
        gram.raw_diagonal = Some(diag);
        Ok(gram)
    }
}

/// Convex combination of Grams sharing one id ordering.
pub fn mix_gram(grams: &[GramMatrix], weights: &[f64]) -> Result<GramMatrix> {
    let first = grams
        .first()
        .ok_or_else(|| Error::InvalidConfig("no Gram matrices to mix".into()))?;
    if grams.len() != weights.len() {
        return Err(Error::InvalidConfig(format!(
            "{} Grams but {} weights",
            grams.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidConfig(
            "mixing weights must be nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "mixing weights sum to {total}, expected 1"
        )));
    }
    for g in &grams[1..] {
        if g.n() != first.n() {
            return Err(Error::InvalidGram(format!(
                "shape mismatch: {} vs {}",
                first.n(),
                g.n()
            )));
        }
        if g.ids != first.ids {
            return Err(Error::InvalidGram("id orderings differ".into()));
        }
    }
    let mut entries = DMatrix::zeros(first.n(), first.n());
    for (g, w) in grams.iter().zip(weights) {
        entries += &g.entries * *w;
    }
    let normalized = grams.iter().all(|g| g.normalized);
    if normalized {
        entries.fill_diagonal(1.0);
    }
    GramMatrix::new(entries, first.ids.clone(), normalized)
}
