//! Untruncated signature kernel as the solution of the Goursat problem
//! `d²k/ds dt = <x'(s), y'(t)> k` with `k = 1` on both boundary edges.

use nalgebra::DMatrix;

use super::truncated::increment_products;
use crate::error::{Error, Result};
use crate::paths::Trajectory;

/// Corner value of the explicit finite-difference solution on a grid that
/// splits every increment pair into `2^refinement x 2^refinement` cells:
///
/// `k[i+1,j+1] = k[i+1,j] + k[i,j+1] - k[i,j] + ½ m (k[i+1,j] + k[i,j+1])`
///
/// where `m` is the cell's share of `<dx_a, dy_b>`. Second-order accurate.
pub fn goursat_corner(products: &DMatrix<f64>, refinement: u32) -> f64 {
    let sub = 1usize << refinement;
    let (rows, cols) = products.shape();
    let width = cols * sub + 1;
    let scale = 1.0 / (sub * sub) as f64;

    let mut prev = vec![1.0; width];
    let mut curr = vec![1.0; width];
    for i in 0..rows * sub {
        curr[0] = 1.0;
        let row = i / sub;
        for j in 0..cols * sub {
            let m = products[(row, j / sub)] * scale;
            let (left, up, diag) = (curr[j], prev[j + 1], prev[j]);
            curr[j + 1] = left + up - diag + 0.5 * m * (left + up);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[width - 1]
}

/// Signature kernel by the PDE route. For `refinement >= 1` the result is
/// Richardson-extrapolated from grids `refinement` and `refinement - 1`,
/// cancelling the leading `O(h²)` error of the base scheme.
pub fn sig_kernel_pde(x: &Trajectory, y: &Trajectory, refinement: u32) -> Result<f64> {
    let products = increment_products(x, y)?;
    let fine = goursat_corner(&products, refinement);
    let value = if refinement == 0 {
        fine
    } else {
        let coarse = goursat_corner(&products, refinement - 1);
        fine + (fine - coarse) / 3.0
    };
    if !value.is_finite() {
        return Err(Error::NonFinite {
            context: format!("PDE kernel ({}, {})", x.id(), y.id()),
        });
    }
    Ok(value)
}
