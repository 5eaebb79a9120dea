//! Proximal operators of the nuclear norm and the truncated nuclear norm.
//!
//! `svt(z, tau)` minimizes `tau * ||X||_* + 1/2 ||X - Z||_F^2`.
//! `svt_truncated(z, tau, theta)` does the same for the truncated nuclear
//! norm, which leaves the `theta` largest singular values unpenalized.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{LatcError, Result};

/// Singular values below this fraction of the largest one are zeroed before
/// thresholding.
pub const SINGULAR_NOISE_FLOOR: f64 = 1e-12;

/// Shrinkage amount and truncation count for one proximal step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageSpec {
    pub tau: f64,
    pub theta: usize,
}

impl ShrinkageSpec {
    pub fn new(tau: f64, theta: usize) -> Self {
        ShrinkageSpec { tau, theta }
    }

    pub fn apply(&self, z: &Array2<f64>) -> Result<Array2<f64>> {
        svt_truncated(z, self.tau, self.theta)
    }
}

/// Singular value thresholding: `U diag(max(sigma - tau, 0)) V^T`.
pub fn svt(z: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    svt_truncated(z, tau, 0)
}

/// Generalized singular value thresholding. The `theta` largest singular
/// values pass through unchanged, the rest are soft-thresholded by `tau`.
pub fn svt_truncated(z: &Array2<f64>, tau: f64, theta: usize) -> Result<Array2<f64>> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(LatcError::Config(format!(
            "shrinkage must be finite and nonnegative, got {}",
            tau
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(LatcError::NonFinite);
    }
    let (rows, cols) = z.dim();
    let min_dim = rows.min(cols);
    if min_dim == 0 {
        if theta > 0 {
            return Err(LatcError::InvalidTruncation { theta, min_dim });
        }
        return Ok(z.clone());
    }
    if theta >= min_dim {
        return Err(LatcError::InvalidTruncation { theta, min_dim });
    }

    // nalgebra's SVD is noticeably faster on tall inputs.
    let transposed = rows < cols;
    let tall = if transposed {
        DMatrix::from_fn(cols, rows, |r, c| z[[c, r]])
    } else {
        DMatrix::from_fn(rows, cols, |r, c| z[[r, c]])
    };
    let (tall_rows, tall_cols) = tall.shape();
    let svd = tall.svd(true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let sigma = &svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let sigma_max = sigma[order[0]];
    let floor = SINGULAR_NOISE_FLOOR * sigma_max;

    let mut out = DMatrix::<f64>::zeros(tall_rows, tall_cols);
    for (rank, &idx) in order.iter().enumerate() {
        let s = if sigma[idx] < floor { 0.0 } else { sigma[idx] };
        let shrunk = if rank < theta { s } else { (s - tau).max(0.0) };
        if shrunk == 0.0 {
            continue;
        }
        let ucol = u.column(idx);
        let vrow = v_t.row(idx);
        out.ger(shrunk, &ucol, &vrow.transpose(), 1.0);
    }

    Ok(if transposed {
        Array2::from_shape_fn((rows, cols), |(r, c)| out[(c, r)])
    } else {
        Array2::from_shape_fn((rows, cols), |(r, c)| out[(r, c)])
    })
}

/// Singular values in descending order.
pub fn singular_values(z: &Array2<f64>) -> Vec<f64> {
    let (rows, cols) = z.dim();
    if rows.min(cols) == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows, cols, |r, c| z[[r, c]]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Sum of all but the `theta` largest singular values.
pub fn truncated_nuclear_norm(z: &Array2<f64>, theta: usize) -> f64 {
    singular_values(z).iter().skip(theta).sum()
}

pub fn nuclear_norm(z: &Array2<f64>) -> f64 {
    truncated_nuclear_norm(z, 0)
}
