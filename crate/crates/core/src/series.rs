use ndarray::{s, Array2};

use crate::error::{LatcError, Result};

/// Sensor-by-time matrix with an observation mask (`true` = observed).
///
/// Values under a `false` mask carry no meaning; [`observed_values`] zeroes
/// them.
///
/// [`observed_values`]: TimeSeriesMatrix::observed_values
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    values: Array2<f64>,
    mask: Array2<bool>,
}

impl TimeSeriesMatrix {
    pub fn new(values: Array2<f64>, mask: Array2<bool>) -> Result<Self> {
        if values.dim() != mask.dim() {
            return Err(LatcError::Dimension(format!(
                "values are {:?} but mask is {:?}",
                values.dim(),
                mask.dim()
            )));
        }
        Ok(TimeSeriesMatrix { values, mask })
    }

    pub fn fully_observed(values: Array2<f64>) -> Self {
        let mask = Array2::from_elem(values.dim(), true);
        TimeSeriesMatrix { values, mask }
    }

    /// Treats NaN cells as unobserved.
    pub fn from_nan_matrix(values: Array2<f64>) -> Self {
        let mask = values.mapv(|v| !v.is_nan());
        TimeSeriesMatrix { values, mask }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn sensors(&self) -> usize {
        self.values.nrows()
    }

    pub fn time_points(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_observed(&self, m: usize, t: usize) -> bool {
        self.mask[[m, t]]
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// The projection onto observed entries (`P_Omega(Y)`).
    pub fn observed_values(&self) -> Array2<f64> {
        let mut out = self.values.clone();
        out.zip_mut_with(&self.mask, |v, &obs| {
            if !obs {
                *v = 0.0;
            }
        });
        out
    }

    /// Frobenius norm of the observed entries.
    pub fn observed_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.mask.iter())
            .filter(|(_, &obs)| obs)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Columns `start..end` (zero-based, end exclusive).
    pub fn columns(&self, start: usize, end: usize) -> Result<TimeSeriesMatrix> {
        if start > end || end > self.time_points() {
            return Err(LatcError::OutOfRange(format!(
                "columns {}..{} of a {}-column matrix",
                start,
                end,
                self.time_points()
            )));
        }
        Ok(TimeSeriesMatrix {
            values: self.values.slice(s![.., start..end]).to_owned(),
            mask: self.mask.slice(s![.., start..end]).to_owned(),
        })
    }

    pub fn with_mask(&self, mask: Array2<bool>) -> Result<TimeSeriesMatrix> {
        TimeSeriesMatrix::new(self.values.clone(), mask)
    }

    pub fn into_parts(self) -> (Array2<f64>, Array2<bool>) {
        (self.values, self.mask)
    }
}

/// Drops the `N mod I` oldest columns so the remaining length is a whole
/// number of seasons.
pub fn trim_to_seasons(y: &TimeSeriesMatrix, season_len: usize) -> Result<TimeSeriesMatrix> {
    let n = y.time_points();
    if season_len == 0 || n < season_len {
        return Err(LatcError::Dimension(format!(
            "{} time points cannot hold a season of length {}",
            n, season_len
        )));
    }
    y.columns(n % season_len, n)
}
