//! Truncated signature kernels by dynamic programming over increment
//! inner products. No tensor is ever materialized.

use nalgebra::DMatrix;

use super::rff::rbf_kernel;
use crate::error::{Error, Result};
use crate::paths::Trajectory;

/// `M[i, j] = <x_{i+1} - x_i, y_{j+1} - y_j>`.
pub fn increment_products(x: &Trajectory, y: &Trajectory) -> Result<DMatrix<f64>> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let dx = DMatrix::from_row_slice(x.len() - 1, x.dim(), &x.increments());
    let dy = DMatrix::from_row_slice(y.len() - 1, y.dim(), &y.increments());
    Ok(dx * dy.transpose())
}

/// Second-order cross differences of the RBF kernel:
/// `k(x_{i+1}, y_{j+1}) + k(x_i, y_j) - k(x_{i+1}, y_j) - k(x_i, y_{j+1})`.
pub fn lifted_increment_products(
    x: &Trajectory,
    y: &Trajectory,
    bandwidth: f64,
) -> Result<DMatrix<f64>> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let mut k = DMatrix::zeros(x.len(), y.len());
    for (i, p) in x.points().enumerate() {
        for (j, q) in y.points().enumerate() {
            k[(i, j)] = rbf_kernel(p, q, bandwidth)?;
        }
    }
    Ok(DMatrix::from_fn(x.len() - 1, y.len() - 1, |i, j| {
        k[(i + 1, j + 1)] + k[(i, j)] - k[(i + 1, j)] - k[(i, j + 1)]
    }))
}

/// Inner product of the exact level-`depth` signatures of two piecewise-linear
/// paths, given their increment inner products.
///
/// Level `k` sums over non-decreasing segment words `i_1 <= ... <= i_k` and
/// `j_1 <= ... <= j_k` of `prod_t M[i_t, j_t]`, weighted by the reciprocal
/// factorials of the run lengths in each word. The state tracks the last
/// segment on each side and its current run length.
pub fn exact_kernel_from_products(m: &DMatrix<f64>, depth: usize) -> f64 {
    let (rows, cols) = m.shape();
    let plane = rows * cols;
    let idx = |r: usize, s: usize, i: usize, j: usize| ((r * depth + s) * rows + i) * cols + j;

    let mut total = 1.0;
    // state[(r, s, i, j)]: words of the current length ending in segments
    // (i, j) whose final runs have lengths r + 1 and s + 1.
    let mut state = vec![0.0; depth * depth * plane];
    for i in 0..rows {
        for j in 0..cols {
            state[idx(0, 0, i, j)] = m[(i, j)];
        }
    }
    total += m.iter().sum::<f64>();

    let mut next = vec![0.0; state.len()];
    let mut by_r = vec![0.0; depth * plane];
    let mut by_s = vec![0.0; depth * plane];
    let mut all = vec![0.0; plane];
    for level in 2..=depth {
        // Run lengths at the previous level are at most level - 1.
        let live = level - 1;
        by_r.iter_mut().for_each(|v| *v = 0.0);
        by_s.iter_mut().for_each(|v| *v = 0.0);
        all.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..live {
            for s in 0..live {
                for p in 0..plane {
                    let v = state[idx(r, s, 0, 0) + p];
                    by_r[r * plane + p] += v;
                    by_s[s * plane + p] += v;
                    all[p] += v;
                }
            }
        }

        // Exclusive prefix sums: over (i' < i, j' < j), over j' < j and over i' < i.
        let prefix_both = exclusive_prefix_2d(&all, rows, cols);
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..rows {
            for j in 0..cols {
                let mij = m[(i, j)];
                next[idx(0, 0, i, j)] = mij * prefix_both[i * cols + j];
            }
        }
        for r in 0..live {
            let slice = &by_r[r * plane..(r + 1) * plane];
            let weight = 1.0 / (r + 2) as f64;
            for i in 0..rows {
                let mut run = 0.0;
                for j in 0..cols {
                    next[idx(r + 1, 0, i, j)] = m[(i, j)] * weight * run;
                    run += slice[i * cols + j];
                }
            }
        }
        for s in 0..live {
            let slice = &by_s[s * plane..(s + 1) * plane];
            let weight = 1.0 / (s + 2) as f64;
            for j in 0..cols {
                let mut run = 0.0;
                for i in 0..rows {
                    next[idx(0, s + 1, i, j)] = m[(i, j)] * weight * run;
                    run += slice[i * cols + j];
                }
            }
        }
        for r in 0..live {
            for s in 0..live {
                let weight = 1.0 / ((r + 2) * (s + 2)) as f64;
                for i in 0..rows {
                    for j in 0..cols {
                        next[idx(r + 1, s + 1, i, j)] = m[(i, j)] * weight * state[idx(r, s, i, j)];
                    }
                }
            }
        }
        std::mem::swap(&mut state, &mut next);
        total += state.iter().sum::<f64>();
    }
    total
}

fn exclusive_prefix_2d(values: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    // out[i][j] = sum of values[i'][j'] with i' < i and j' < j.
    let mut out = vec![0.0; rows * cols];
    let mut column_acc = vec![0.0; cols];
    for i in 0..rows {
        let mut row_acc = 0.0;
        for j in 0..cols {
            out[i * cols + j] = row_acc;
            row_acc += column_acc[j];
        }
        for j in 0..cols {
            column_acc[j] += values[i * cols + j];
        }
    }
    out
}

/// Discrete (strictly increasing index) truncated signature kernel over a
/// matrix of increment similarities.
pub fn discrete_kernel_from_products(m: &DMatrix<f64>, depth: usize) -> f64 {
    let (rows, cols) = m.shape();
    let mut state: Vec<f64> = m.transpose().as_slice().to_vec();
    let mut total = 1.0 + state.iter().sum::<f64>();
    for _ in 2..=depth {
        let prefix = exclusive_prefix_2d(&state, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                state[i * cols + j] = m[(i, j)] * prefix[i * cols + j];
            }
        }
        total += state.iter().sum::<f64>();
    }
    total
}

/// `<S^L(x), S^L(y)>` for the exact truncated signatures of both paths.
pub fn sig_kernel_truncated(x: &Trajectory, y: &Trajectory, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::InvalidConfig("truncation level must be >= 1".into()));
    }
    let value = exact_kernel_from_products(&increment_products(x, y)?, depth);
    if !value.is_finite() {
        return Err(Error::NonFinite {
            context: format!("truncated kernel ({}, {})", x.id(), y.id()),
        });
    }
    Ok(value)
}

/// Discrete truncated signature kernel with RBF-lifted increments: the
/// quantity the random Fourier signature features estimate without bias.
pub fn sig_kernel_lifted(
    x: &Trajectory,
    y: &Trajectory,
    depth: usize,
    bandwidth: f64,
) -> Result<f64> {
    if depth == 0 {
        return Err(Error::InvalidConfig("truncation level must be >= 1".into()));
    }
    Ok(discrete_kernel_from_products(
        &lifted_increment_products(x, y, bandwidth)?,
        depth,
    ))
}
