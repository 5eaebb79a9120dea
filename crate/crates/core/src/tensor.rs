//! Dense third-order tensors and the mode-k matricizations used by the solver.
//!
//! A [`Tensor3`] has shape `sensors x season_len x seasons` (in the traffic
//! setting: sensor, time of day, day). Unfolding follows the Kolda-Bader
//! convention: the mode-k unfolding puts index `k` on the rows and orders the
//! columns so that the remaining indices vary with the lower-numbered mode
//! fastest. For mode 1 that means column `i + I*j`, which is exactly the time
//! index of the original `M x N` series matrix. The matrix/tensor transform
//! ([`to_tensor`] / [`to_matrix`]) therefore coincides with mode-1 folding.

use ndarray::Array2;

use crate::error::{LatcError, Result};
use crate::series::TimeSeriesMatrix;

/// Tensor shape `(M, I, J)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub sensors: usize,
    pub season_len: usize,
    pub seasons: usize,
}

impl Dims {
    pub fn new(sensors: usize, season_len: usize, seasons: usize) -> Self {
        Dims {
            sensors,
            season_len,
            seasons,
        }
    }

    pub fn len(&self) -> usize {
        self.sensors * self.season_len * self.seasons
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shape of the mode-k unfolding.
    pub fn unfolded_shape(&self, k: usize) -> Result<(usize, usize)> {
        let (m, i, j) = (self.sensors, self.season_len, self.seasons);
        match k {
            1 => Ok((m, i * j)),
            2 => Ok((i, m * j)),
            3 => Ok((j, m * i)),
            _ => Err(LatcError::InvalidMode(k)),
        }
    }

    /// Smallest side over all three unfoldings; a truncation count must stay
    /// below this.
    pub fn min_unfolded_side(&self) -> usize {
        (1..=3)
            .map(|k| {
                let (r, c) = self.unfolded_shape(k).unwrap();
                r.min(c)
            })
            .min()
            .unwrap()
    }
}

/// Dense `M x I x J` tensor.
///
/// Storage is column-major: the sensor index varies fastest, then the
/// position within a season, then the season. Callers only see
/// index-explicit accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: Dims) -> Result<Self> {
        check_dims(dims)?;
        Ok(Tensor3 {
            dims,
            data: vec![0.0; dims.len()],
        })
    }

    pub fn from_fn<F>(dims: Dims, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let mut t = Tensor3::zeros(dims)?;
        for j in 0..dims.seasons {
            for i in 0..dims.season_len {
                for m in 0..dims.sensors {
                    let idx = t.offset(m, i, j);
                    t.data[idx] = f(m, i, j);
                }
            }
        }
        Ok(t)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    fn offset(&self, m: usize, i: usize, j: usize) -> usize {
        m + self.dims.sensors * (i + self.dims.season_len * j)
    }

    #[inline]
    pub fn get(&self, m: usize, i: usize, j: usize) -> f64 {
        self.data[self.offset(m, i, j)]
    }

    #[inline]
    pub fn set(&mut self, m: usize, i: usize, j: usize, v: f64) {
        let idx = self.offset(m, i, j);
        self.data[idx] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Elementwise `self + scale * other`.
    pub fn scaled_add(&self, scale: f64, other: &Tensor3) -> Result<Tensor3> {
        self.same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(Tensor3 {
            dims: self.dims,
            data,
        })
    }

    /// Elementwise combination of two tensors of equal dims.
    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Tensor3, f: F) -> Result<Tensor3> {
        self.same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Tensor3 {
            dims: self.dims,
            data,
        })
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn same_dims(&self, other: &Tensor3) -> Result<()> {
        if self.dims != other.dims {
            return Err(LatcError::Dimension(format!(
                "tensor dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

fn check_dims(dims: Dims) -> Result<()> {
    if dims.is_empty() {
        return Err(LatcError::Dimension(format!(
            "tensor dims must all be positive, got {:?}",
            dims
        )));
    }
    Ok(())
}

/// Mode-k unfolding (`k` in 1..=3).
pub fn unfold(t: &Tensor3, k: usize) -> Result<Array2<f64>> {
    let d = t.dims;
    let (rows, cols) = d.unfolded_shape(k)?;
    let mut out = Array2::zeros((rows, cols));
    for j in 0..d.seasons {
        for i in 0..d.season_len {
            for m in 0..d.sensors {
                let (r, c) = unfolded_index(d, k, m, i, j);
                out[[r, c]] = t.get(m, i, j);
            }
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`] for the same mode and dims.
pub fn fold(mat: &Array2<f64>, k: usize, dims: Dims) -> Result<Tensor3> {
    check_dims(dims)?;
    let expected = dims.unfolded_shape(k)?;
    if mat.dim() != expected {
        return Err(LatcError::Dimension(format!(
            "mode-{} fold of {:?} needs a {}x{} matrix, got {}x{}",
            k,
            dims,
            expected.0,
            expected.1,
            mat.nrows(),
            mat.ncols()
        )));
    }
    Tensor3::from_fn(dims, |m, i, j| {
        let (r, c) = unfolded_index(dims, k, m, i, j);
        mat[[r, c]]
    })
}

#[inline]
fn unfolded_index(d: Dims, k: usize, m: usize, i: usize, j: usize) -> (usize, usize) {
    match k {
        1 => (m, i + d.season_len * j),
        2 => (i, m + d.sensors * j),
        _ => (j, m + d.sensors * i),
    }
}

/// Fold an `M x N` series matrix into an `M x I x J` tensor, where time
/// point `t` lands on position `t % I` of season `t / I`.
pub fn to_tensor(values: &Array2<f64>, season_len: usize) -> Result<Tensor3> {
    let (m, n) = values.dim();
    if season_len == 0 || n % season_len != 0 || n == 0 {
        return Err(LatcError::NotDivisible {
            len: n,
            season: season_len,
        });
    }
    fold(values, 1, Dims::new(m, season_len, n / season_len))
}

/// Same as [`to_tensor`] for a masked series; unobserved cells contribute 0.
pub fn series_to_tensor(y: &TimeSeriesMatrix, season_len: usize) -> Result<Tensor3> {
    to_tensor(&y.observed_values(), season_len)
}

/// Inverse of [`to_tensor`]; identical to the mode-1 unfolding.
pub fn to_matrix(t: &Tensor3) -> Array2<f64> {
    let d = t.dims;
    // Column-major storage with the sensor index fastest is already the
    // mode-1 unfolding laid out column by column.
    Array2::from_shape_vec(
        ndarray::ShapeBuilder::f((d.sensors, d.season_len * d.seasons)),
        t.data.clone(),
    )
    .expect("tensor storage matches its dims")
}
