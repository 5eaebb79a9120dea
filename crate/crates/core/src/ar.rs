//! Per-series autoregressive model over a fixed lag set.
//!
//! Each series `m` is modelled as `x[t] = sum_i a[m][i] * x[t - h_i] + noise`.
//! Only time points `t >= h_d` (zero-based) have a full set of lagged values,
//! so design matrices and residual sums start there.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{LatcError, Result};

/// Relative singular value cutoff for the least-squares pseudo-inverse.
pub const PINV_RCOND: f64 = 1e-10;

/// Strictly increasing set of positive lags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagSet {
    lags: Vec<usize>,
}

impl LagSet {
    pub fn new(lags: Vec<usize>) -> Result<Self> {
        if lags.is_empty() {
            return Err(LatcError::InvalidLags("lag set is empty".into()));
        }
        if lags[0] == 0 {
            return Err(LatcError::InvalidLags("lags must be positive".into()));
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LatcError::InvalidLags(format!(
                "lags must be strictly increasing: {:?}",
                lags
            )));
        }
        Ok(LagSet { lags })
    }

    /// `{1..=6} ∪ {I-2..=I+3}` for season length `I`.
    pub fn seasonal_default(season_len: usize) -> Result<Self> {
        if season_len == 0 {
            return Err(LatcError::InvalidLags(
                "season length must be positive".into(),
            ));
        }
        let mut lags: Vec<usize> = (1..=6).collect();
        lags.extend((season_len.saturating_sub(2).max(1))..=season_len + 3);
        lags.sort_unstable();
        lags.dedup();
        LagSet::new(lags)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// The largest lag, `h_d`.
    pub fn max_lag(&self) -> usize {
        *self.lags.last().expect("lag sets are never empty")
    }

    /// Series must be strictly longer than the largest lag.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if n <= self.max_lag() {
            return Err(LatcError::InvalidLags(format!(
                "largest lag {} needs more than {} time points",
                self.max_lag(),
                n
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for LagSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.lags.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl std::str::FromStr for LagSet {
    type Err = LatcError;

    fn from_str(s: &str) -> Result<Self> {
        let lags = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| LatcError::Parse(format!("bad lag {:?}", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        LagSet::new(lags)
    }
}

/// `M x d` coefficient matrix; row `m` holds the coefficients of series `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArCoefficients {
    a: Array2<f64>,
}

impl ArCoefficients {
    pub fn new(a: Array2<f64>) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(LatcError::NonFinite);
        }
        Ok(ArCoefficients { a })
    }

    pub fn zeros(series: usize, lags: usize) -> Self {
        ArCoefficients {
            a: Array2::zeros((series, lags)),
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn row(&self, m: usize) -> ArrayView1<'_, f64> {
        self.a.row(m)
    }

    pub fn set_row(&mut self, m: usize, coeffs: &Array1<f64>) {
        self.a.row_mut(m).assign(coeffs);
    }

    pub fn series(&self) -> usize {
        self.a.nrows()
    }

    pub fn lags(&self) -> usize {
        self.a.ncols()
    }
}

/// Lagged design matrix: row `r` corresponds to time `t = h_d + r` and holds
/// `x[t - h_1], ..., x[t - h_d]`.
pub fn build_design(x: ArrayView1<'_, f64>, lags: &LagSet) -> Result<Array2<f64>> {
    let n = x.len();
    lags.check_len(n)?;
    let hd = lags.max_lag();
    let h = lags.as_slice();
    Ok(Array2::from_shape_fn((n - hd, h.len()), |(r, i)| {
        x[hd + r - h[i]]
    }))
}

/// Minimum-norm least-squares solution of `design * a = response`.
pub fn fit_coefficients(
    response: ArrayView1<'_, f64>,
    design: &Array2<f64>,
) -> Result<Array1<f64>> {
    fit_coefficients_with_cutoff(response, design, PINV_RCOND)
}

/// Like [`fit_coefficients`], but singular values below `rcond * sigma_max`
/// are dropped from the pseudo-inverse.
pub fn fit_coefficients_with_cutoff(
    response: ArrayView1<'_, f64>,
    design: &Array2<f64>,
    rcond: f64,
) -> Result<Array1<f64>> {
    let (rows, cols) = design.dim();
    if rows == 0 {
        return Err(LatcError::EmptyDesign);
    }
    if response.len() != rows {
        return Err(LatcError::Dimension(format!(
            "design has {} rows but response has {} entries",
            rows,
            response.len()
        )));
    }
    if cols == 0 {
        return Ok(Array1::zeros(0));
    }
    let q = DMatrix::from_fn(rows, cols, |r, c| design[[r, c]]);
    let z = DVector::from_iterator(rows, response.iter().copied());
    let svd = q.svd(true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = rcond * sigma_max;

    let mut a = DVector::<f64>::zeros(cols);
    for k in 0..sigma.len() {
        if sigma[k] > cutoff && sigma[k] > 0.0 {
            let weight = u.column(k).dot(&z) / sigma[k];
            a.axpy(weight, &v_t.row(k).transpose(), 1.0);
        }
    }
    Ok(Array1::from_iter(a.iter().copied()))
}

/// Sum of squared AR residuals over all series and all `t >= h_d`.
pub fn ar_norm(z: &Array2<f64>, a: &ArCoefficients, lags: &LagSet) -> Result<f64> {
    let (m, n) = z.dim();
    if a.series() != m || a.lags() != lags.len() {
        return Err(LatcError::Dimension(format!(
            "coefficients are {}x{} for {} series and {} lags",
            a.series(),
            a.lags(),
            m,
            lags.len()
        )));
    }
    lags.check_len(n)?;
    let hd = lags.max_lag();
    let h = lags.as_slice();
    let mut total = 0.0;
    for row in 0..m {
        let coeffs = a.row(row);
        for t in hd..n {
            let pred: f64 = h
                .iter()
                .zip(coeffs.iter())
                .map(|(&l, &c)| c * z[[row, t - l]])
                .sum();
            let r = z[[row, t]] - pred;
            total += r * r;
        }
    }
    Ok(total)
}
