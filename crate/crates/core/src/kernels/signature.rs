//! Dense truncated signatures in the tensor algebra.

use crate::error::{Error, Result};
use crate::paths::Trajectory;

/// Default cap on the total number of stored tensor coordinates.
pub const DEFAULT_ELEMENT_BUDGET: u128 = 100_000_000;

/// Levels `0..=depth` of a path signature; level `k` is a row-major order-`k`
/// tensor over `R^dim` with `dim^k` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSignature {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

/// `sum_{k <= depth} dim^k`, saturating.
pub(crate) fn tensor_elements(dim: usize, depth: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(dim as u128);
    }
    total
}

impl TruncatedSignature {
    /// The unit element `(1, 0, 0, ...)`.
    pub fn unit(dim: usize, depth: usize) -> Self {
        let levels = (0..=depth)
            .map(|k| {
                let mut v = vec![0.0; dim.pow(k as u32)];
                if k == 0 {
                    v[0] = 1.0;
                }
                v
            })
            .collect();
        Self { dim, levels }
    }

    /// Signature of a single linear segment: level `k` is `inc^{⊗k} / k!`.
    pub fn segment(increment: &[f64], depth: usize) -> Self {
        let dim = increment.len();
        let mut levels = Vec::with_capacity(depth + 1);
        levels.push(vec![1.0]);
        for k in 1..=depth {
            let prev: &Vec<f64> = &levels[k - 1];
            let mut next = Vec::with_capacity(prev.len() * dim);
            for a in prev {
                next.extend(increment.iter().map(|b| a * b / k as f64));
            }
            levels.push(next);
        }
        Self { dim, levels }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Truncation level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Frobenius norm of level `k`.
    pub fn level_norm(&self, k: usize) -> f64 {
        self.levels[k].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sum over levels of Frobenius inner products.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum())
    }

    /// Largest absolute coordinate difference across all levels.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.depth() != other.depth() {
            return Err(Error::LevelMismatch(self.depth(), other.depth()));
        }
        Ok(())
    }
}

/// Truncated tensor product: level `k` of the result is
/// `sum_{i + j = k} a_i ⊗ b_j`.
pub fn tensor_concat_product(
    a: &TruncatedSignature,
    b: &TruncatedSignature,
) -> Result<TruncatedSignature> {
    a.check_compatible(b)?;
    let depth = a.depth();
    let mut levels = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let mut out = vec![0.0; a.dim.pow(k as u32)];
        for i in 0..=k {
            let (left, right) = (&a.levels[i], &b.levels[k - i]);
            for (li, l) in left.iter().enumerate() {
                if *l == 0.0 {
                    continue;
                }
                let block = &mut out[li * right.len()..(li + 1) * right.len()];
                for (o, r) in block.iter_mut().zip(right) {
                    *o += l * r;
                }
            }
        }
        levels.push(out);
    }
    Ok(TruncatedSignature { dim: a.dim, levels })
}

/// Exact level-`depth` signature of the piecewise-linear interpolation of `x`,
/// as a Chen product of segment exponentials.
pub fn truncated_signature(x: &Trajectory, depth: usize) -> Result<TruncatedSignature> {
    truncated_signature_with_budget(x, depth, DEFAULT_ELEMENT_BUDGET)
}

pub fn truncated_signature_with_budget(
    x: &Trajectory,
    depth: usize,
    budget: u128,
) -> Result<TruncatedSignature> {
    if depth == 0 {
        return Err(Error::InvalidConfig("truncation level must be >= 1".into()));
    }
    let required = tensor_elements(x.dim(), depth);
    if required > budget {
        return Err(Error::ElementBudget { required, budget });
    }
    let increments = x.increments();
    increments
        .chunks_exact(x.dim())
        .try_fold(TruncatedSignature::unit(x.dim(), depth), |acc, inc| {
            tensor_concat_product(&acc, &TruncatedSignature::segment(inc, depth))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(points: &[&[f64]]) -> Trajectory {
        Trajectory::new("p", points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    /// Level-k value of a 1-D segment with increment `delta`, from the factorial formula.
    fn one_dim_level(delta: f64, k: u32) -> f64 {
        delta.powi(k as i32) / (1..=k).map(f64::from).product::<f64>()
    }

    #[test]
    fn one_dimensional_closed_form() {
        let sig = truncated_signature(&path(&[&[0.0], &[2.0]]), 3).unwrap();
        let expected: Vec<f64> = (0..=3).map(|k| one_dim_level(2.0, k)).collect();
        assert_eq!(expected, [1.0, 2.0, 2.0, 4.0 / 3.0]);
        for (k, e) in expected.iter().enumerate() {
            assert!((sig.level(k)[0] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_path_is_unit() {
        let sig =
            truncated_signature(&path(&[&[1.5, -2.0], &[1.5, -2.0], &[1.5, -2.0]]), 4).unwrap();
        assert_eq!(sig, TruncatedSignature::unit(2, 4));
    }

    #[test]
    fn level_sizes() {
        let sig = truncated_signature(&path(&[&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]]), 3).unwrap();
        for k in 0..=3 {
            assert_eq!(sig.level(k).len(), 3usize.pow(k as u32));
        }
    }

    #[test]
    fn two_segment_chen_product() {
        let x = path(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let whole = truncated_signature(&x, 3).unwrap();
        let a = TruncatedSignature::segment(&[1.0, 0.0], 3);
        let b = TruncatedSignature::segment(&[0.0, 1.0], 3);
        let prod = tensor_concat_product(&a, &b).unwrap();
        assert!(whole.max_abs_diff(&prod).unwrap() < 1e-15);
        // Level 2 of an L-shaped path: only the (0, 1) iterated integral is 1.
        assert_eq!(whole.level(2), &[0.5, 1.0, 0.0, 0.5]);
    }

    #[test]
    fn unit_is_neutral() {
        let x = path(&[&[0.0, 1.0], &[0.3, -0.2], &[1.1, 0.4]]);
        let sig = truncated_signature(&x, 3).unwrap();
        let unit = TruncatedSignature::unit(2, 3);
        assert_eq!(tensor_concat_product(&sig, &unit).unwrap(), sig);
        assert_eq!(tensor_concat_product(&unit, &sig).unwrap(), sig);
    }

    #[test]
    fn segments_compose_additively_in_one_dimension() {
        let a = TruncatedSignature::segment(&[1.0], 5);
        let prod = tensor_concat_product(&a, &a).unwrap();
        let oracle = truncated_signature(&path(&[&[0.0], &[2.0]]), 5).unwrap();
        assert!(prod.max_abs_diff(&oracle).unwrap() < 1e-14);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = TruncatedSignature::unit(2, 3);
        assert!(matches!(
            tensor_concat_product(&a, &TruncatedSignature::unit(3, 3)),
            Err(Error::DimensionMismatch(2, 3))
        ));
        assert!(matches!(
            tensor_concat_product(&a, &TruncatedSignature::unit(2, 2)),
            Err(Error::LevelMismatch(3, 2))
        ));
        assert!(truncated_signature(&path(&[&[0.0], &[1.0]]), 0).is_err());
    }

    #[test]
    fn element_budget_guard() {
        let x = path(&[&[0.0; 10], &[1.0; 10]]);
        let err = truncated_signature_with_budget(&x, 4, 1000).unwrap_err();
        assert!(matches!(
            err,
            Error::ElementBudget {
                required: 11111,
                ..
            }
        ));
        assert!(truncated_signature_with_budget(&x, 3, 1111).is_ok());
    }
}
