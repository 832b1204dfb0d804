//! Spectral diversity metrics of a Gram matrix.
//!
//! Entropies are taken over the eigenvalues of the trace-normalized Gram
//! `K / n` and reported in nats. The determinant volume uses `K` itself.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;

/// Default ridge for the regularized log-determinant.
pub const DEFAULT_MU: f64 = 1e-6;

/// Eigenvalues at or above this are floating-point slack and clamp to zero.
const EIGEN_HARD_FLOOR: f64 = -1e-6;
const DET_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Eigenvalues of `K / n`, nonincreasing. Only serialized in verbose mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    pub shannon_entropy: f64,
    pub von_neumann_entropy: f64,
    pub vendi_score: f64,
    pub log_det_regularized: f64,
    pub mu: f64,
    pub effective_rank: f64,
}

impl SpectrumReport {
    pub fn compute(gram: &GramMatrix, mu: f64, verbose: bool) -> Result<Self> {
        let eigenvalues = normalized_eigenvalues(gram)?;
        let shannon = entropy_of_spectrum(&eigenvalues);
        let vendi = shannon.exp();
        Ok(Self {
            eigenvalues: verbose.then_some(eigenvalues),
            shannon_entropy: shannon,
            von_neumann_entropy: von_neumann_entropy(gram)?,
            vendi_score: vendi,
            log_det_regularized: logdet_regularized(gram, mu)?,
            mu,
            effective_rank: vendi,
        })
    }
}

fn require_normalized(gram: &GramMatrix) -> Result<()> {
    if gram.is_normalized() {
        Ok(())
    } else {
        Err(Error::NotNormalized)
    }
}

fn clamp_eigenvalue(v: f64) -> Result<f64> {
    if v < EIGEN_HARD_FLOOR {
        Err(Error::NotPsd(v))
    } else {
        Ok(v.max(0.0))
    }
}

/// Clamped eigenvalues of `k / n`, nonincreasing.
fn trace_normalized_eigenvalues(k: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = k.nrows() as f64;
    let mut values = SymmetricEigen::new(k / n)
        .eigenvalues
        .iter()
        .map(|&v| clamp_eigenvalue(v))
        .collect::<Result<Vec<_>>>()?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn entropy_of_spectrum(values: &[f64]) -> f64 {
    let h: f64 = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    h.max(0.0)
}

/// Shannon entropy of `k / |k|` for a unit-diagonal principal block. Used by
/// subset objectives, which do not carry ids.
pub(crate) fn unit_diagonal_entropy(k: &DMatrix<f64>) -> Result<f64> {
    if k.nrows() == 1 {
        return Ok(0.0);
    }
    Ok(entropy_of_spectrum(&trace_normalized_eigenvalues(k)?))
}

/// Eigenvalues of `K / n`, nonincreasing, with slack below zero clamped.
pub fn normalized_eigenvalues(gram: &GramMatrix) -> Result<Vec<f64>> {
    require_normalized(gram)?;
    trace_normalized_eigenvalues(gram.entries())
}

pub fn shannon_entropy(gram: &GramMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&normalized_eigenvalues(gram)?))
}

/// `-Tr(A ln A)` with `A = K / n`.
///
/// Deliberately independent of [`shannon_entropy`]: the eigenbasis comes from
/// a Jacobi sweep rather than the library solver, the matrix logarithm is
/// assembled explicitly, and the trace is taken of the product with `A`.
pub fn von_neumann_entropy(gram: &GramMatrix) -> Result<f64> {
    require_normalized(gram)?;
    let n = gram.n();
    let a = gram.entries() / n as f64;
    let (values, vectors) = jacobi_eigen(&a);

    let mut log_a = DMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let lambda = clamp_eigenvalue(lambda)?;
        if lambda == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        log_a += lambda.ln() * v * v.transpose();
    }
    // Tr(A B) for symmetric A, B is the sum of the entrywise product.
    let trace = a.component_mul(&log_a).sum();
    Ok((-trace).max(0.0))
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and a matrix whose columns are the eigenvectors.
fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// `exp` of the Shannon entropy: the effective number of distinct samples.
pub fn vendi_score(gram: &GramMatrix) -> Result<f64> {
    Ok(shannon_entropy(gram)?.exp())
}

/// `det(K)`. Lies in `[0, 1]` for normalized PSD Grams.
pub fn det_volume(gram: &GramMatrix) -> Result<f64> {
    require_normalized(gram)?;
    let det = gram.entries().clone().lu().determinant();
    if det < DET_FLOOR {
        return Err(Error::InvalidGram(format!(
            "negative determinant {det:e}; matrix is not PSD"
        )));
    }
    Ok(det.max(0.0))
}

/// `ln det(K + mu I)`.
pub fn logdet_regularized(gram: &GramMatrix, mu: f64) -> Result<f64> {
    logdet_shifted(gram.entries(), mu)
}

pub(crate) fn logdet_shifted(k: &DMatrix<f64>, mu: f64) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let n = k.nrows();
    let shifted = k + DMatrix::<f64>::identity(n, n) * mu;
    if let Some(chol) = Cholesky::new(shifted) {
        return Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>());
    }
    // Slightly indefinite input: fall back to the clamped spectrum.
    Ok(SymmetricEigen::new(k.clone())
        .eigenvalues
        .iter()
        .map(|&v| (v.max(0.0) + mu).ln())
        .sum())
}


#[cfg(test)]
mod tests {
    use super::testutil::random_gram;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn block() -> GramMatrix {
        GramMatrix::from_rows(
            &[
                vec![1.0, 1.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            true,
        )
        .unwrap()
    }

    fn ones(n: usize) -> GramMatrix {
        GramMatrix::from_rows(&vec![vec![1.0; n]; n], true).unwrap()
    }

    #[test]
    fn identity_fixtures() {
        let h = shannon_entropy(&GramMatrix::identity(4)).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-12);
        assert!((von_neumann_entropy(&GramMatrix::identity(2)).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((vendi_score(&GramMatrix::identity(7)).unwrap() - 7.0).abs() < 1e-10);
        assert!((det_volume(&GramMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-12);
        let ld = logdet_regularized(&GramMatrix::identity(3), 1.0).unwrap();
        assert!((ld - 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn all_ones_fixtures() {
        for n in [1, 2, 5, 9] {
            assert!(shannon_entropy(&ones(n)).unwrap().abs() < 1e-12);
            assert!(von_neumann_entropy(&ones(n)).unwrap().abs() < 1e-12);
            assert!((vendi_score(&ones(n)).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(det_volume(&ones(4)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn block_fixture() {
        // Eigenvalues of K/3 are 2/3, 1/3 and 0.
        let expected = -(2.0 / 3.0) * (2.0f64 / 3.0).ln() - (1.0 / 3.0) * (1.0f64 / 3.0).ln();
        assert!((expected - (3f64.ln() - 2.0 / 3.0 * 2f64.ln())).abs() < 1e-15);
        assert!((shannon_entropy(&block()).unwrap() - expected).abs() < 1e-12);
        assert!((von_neumann_entropy(&block()).unwrap() - expected).abs() < 1e-12);
        assert!((vendi_score(&block()).unwrap() - expected.exp()).abs() < 1e-11);
        assert!((vendi_score(&block()).unwrap() - 1.8898816).abs() < 1e-6);
        let ev = normalized_eigenvalues(&block()).unwrap();
        assert!((ev[0] - 2.0 / 3.0).abs() < 1e-12 && (ev[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(ev[2], 0.0);
    }

    #[test]
    fn determinant_fixtures() {
        let g = GramMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]], true).unwrap();
        assert!((det_volume(&g).unwrap() - 0.75).abs() < 1e-12);
        assert!(det_volume(&block()).unwrap() < 1e-10);
        assert!(logdet_regularized(&block(), 1e-3).unwrap().is_finite());
    }

    #[test]
    fn shannon_equals_von_neumann_on_random_grams() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..=20);
            let rank = rng.random_range(1..=n + 2);
            let g = random_gram(&mut rng, n, rank);
            let s = shannon_entropy(&g).unwrap();
            let v = von_neumann_entropy(&g).unwrap();
            assert!((s - v).abs() < 1e-8, "{s} vs {v}");
            assert!(s >= 0.0 && s <= (n as f64).ln() + 1e-9);
            let ev = normalized_eigenvalues(&g).unwrap();
            assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn logdet_matches_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(1..=10);
            let rank = rng.random_range(1..=n + 1);
            let g = random_gram(&mut rng, n, rank);
            let mu = 10f64.powf(rng.random_range(-4.0..1.0));
            let oracle: f64 = SymmetricEigen::new(g.entries().clone())
                .eigenvalues
                .iter()
                .map(|&v| (v + mu).ln())
                .sum();
            assert!((logdet_regularized(&g, mu).unwrap() - oracle).abs() < 1e-9);
        }
        assert!(logdet_regularized(&block(), 0.0).is_err());
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_gram(&mut rng, 8, 4);
        let p = g.permuted(&[3, 7, 0, 1, 6, 2, 5, 4]).unwrap();
        let a = SpectrumReport::compute(&g, 1e-3, false).unwrap();
        let b = SpectrumReport::compute(&p, 1e-3, false).unwrap();
        assert!((a.shannon_entropy - b.shannon_entropy).abs() < 1e-12);
        assert!((a.von_neumann_entropy - b.von_neumann_entropy).abs() < 1e-12);
        assert!((a.log_det_regularized - b.log_det_regularized).abs() < 1e-10);
        assert!((det_volume(&g).unwrap() - det_volume(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn duplicate_drives_determinant_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_gram(&mut rng, 5, 6);
        assert!(det_volume(&g).unwrap() > 1e-6);
        let dup = g
            .permuted(&[0, 1, 2, 3, 4])
            .unwrap()
            .submatrix(&[0, 1, 2, 3, 4, 2]);
        let ids = (0..6).map(|i| i.to_string()).collect();
        let dup = GramMatrix::new(dup, ids, true).unwrap();
        assert!(det_volume(&dup).unwrap() < 1e-10);
        assert!(det_volume(&g).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn slack_eigenvalues_clamp_and_invalid_ones_fail() {
        // Off-diagonal 1 + 1e-9 gives an eigenvalue of about -5e-10 for K/2.
        let g =
            GramMatrix::from_rows(&[vec![1.0, 1.0 + 1e-9], vec![1.0 + 1e-9, 1.0]], true).unwrap();
        let h = shannon_entropy(&g).unwrap();
        assert!(h.is_finite() && h.abs() < 1e-8);
        assert!(von_neumann_entropy(&g).unwrap().abs() < 1e-8);

        let bad = GramMatrix::from_rows(
            &[
                vec![1.0, 0.9, -0.9],
                vec![0.9, 1.0, 0.9],
                vec![-0.9, 0.9, 1.0],
            ],
            true,
        )
        .unwrap();
        assert!(matches!(shannon_entropy(&bad), Err(Error::NotPsd(_))));
        assert!(von_neumann_entropy(&bad).is_err());
        assert!(det_volume(&bad).is_err());
    }

    #[test]
    fn requires_normalized_gram() {
        let g = GramMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], false).unwrap();
        assert!(matches!(shannon_entropy(&g), Err(Error::NotNormalized)));
        assert!(matches!(det_volume(&g), Err(Error::NotNormalized)));
        assert!(logdet_regularized(&g, 1.0).is_ok());
    }

    #[test]
    fn report_serialization() {
        let r = SpectrumReport::compute(&GramMatrix::identity(2), DEFAULT_MU, false).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("eigenvalues").is_none());
        assert_eq!(json["effective_rank"], json["vendi_score"]);
        let r = SpectrumReport::compute(&GramMatrix::identity(2), DEFAULT_MU, true).unwrap();
        assert_eq!(r.eigenvalues.unwrap(), vec![0.5, 0.5]);
    }
}
