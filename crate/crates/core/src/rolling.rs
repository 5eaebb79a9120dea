//! Rolling multi-window prediction.
//!
//! Window `s` (1-based) is the `I*J` columns ending at `t + s*tau`, with its
//! last `tau` columns hidden. Each window is imputed from scratch and the
//! recovered tail becomes block `s` of the forecast. Windows only ever see
//! the raw input, never earlier forecasts.

use ndarray::{s, Array2};
use rayon::prelude::*;

use crate::error::{LatcError, Result};
use crate::series::TimeSeriesMatrix;
use crate::solver::{impute, ConvergenceReport, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionTask {
    /// Columns available before the first forecast block.
    pub train_end: usize,
    /// Number of rolling windows `S`.
    pub windows: usize,
    /// Columns forecast per window.
    pub horizon: usize,
    pub season_len: usize,
    /// Seasons per window, so each window spans `season_len * seasons` columns.
    pub seasons: usize,
}

impl PredictionTask {
    pub fn window_len(&self) -> usize {
        self.season_len * self.seasons
    }

    /// Picks the largest whole number of seasons that fits before the first
    /// forecast block ends.
    pub fn with_max_history(
        train_end: usize,
        windows: usize,
        horizon: usize,
        season_len: usize,
    ) -> Result<Self> {
        if season_len == 0 {
            return Err(LatcError::Config("season length must be positive".into()));
        }
        PredictionTask {
            train_end,
            windows,
            horizon,
            season_len,
            seasons: (train_end + horizon) / season_len,
        }
        .validated_shape()
    }

    fn validated_shape(self) -> Result<Self> {
        if self.horizon == 0 || self.windows == 0 {
            return Err(LatcError::Config(
                "need at least one window of at least one column".into(),
            ));
        }
        if self.season_len == 0 || self.seasons == 0 {
            return Err(LatcError::Config(
                "windows must span at least one season".into(),
            ));
        }
        if self.horizon >= self.window_len() {
            return Err(LatcError::Config(format!(
                "horizon {} leaves no history in a {}-column window",
                self.horizon,
                self.window_len()
            )));
        }
        if self.train_end + self.horizon < self.window_len() {
            return Err(LatcError::OutOfRange(format!(
                "first window needs {} columns of history but only {} precede its end",
                self.window_len(),
                self.train_end + self.horizon
            )));
        }
        Ok(self)
    }

    /// Checks the task against a series of `n` columns.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.validated_shape()?;
        let end = self.train_end + self.windows * self.horizon;
        if end > n {
            return Err(LatcError::OutOfRange(format!(
                "{} windows of {} after column {} run past the {} available columns",
                self.windows, self.horizon, self.train_end, n
            )));
        }
        Ok(())
    }
}

/// Window `s` (1-based) with its forecast block hidden.
pub fn make_window(
    y: &TimeSeriesMatrix,
    task: &PredictionTask,
    s: usize,
) -> Result<TimeSeriesMatrix> {
    task.validate(y.time_points())?;
    if s == 0 || s > task.windows {
        return Err(LatcError::OutOfRange(format!(
            "window {} of {}",
            s, task.windows
        )));
    }
    let end = task.train_end + s * task.horizon;
    let start = end - task.window_len();
    let window = y.columns(start, end)?;
    let len = task.window_len();
    let mut mask = window.mask().clone();
    mask.slice_mut(s![.., len - task.horizon..]).fill(false);
    window.with_mask(mask)
}

#[derive(Debug, Clone)]
pub struct Prediction {
    /// `M x (S * tau)` forecast, block `s` in columns `(s-1)*tau..s*tau`.
    pub values: Array2<f64>,
    pub reports: Vec<ConvergenceReport>,
}

impl Prediction {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }
}

/// Runs every window (in parallel) and stitches the forecast blocks.
pub fn predict(
    y: &TimeSeriesMatrix,
    task: &PredictionTask,
    config: &SolverConfig,
) -> Result<Prediction> {
    task.validate(y.time_points())?;
    let len = task.window_len();
    let tau = task.horizon;
    let blocks: Vec<(Array2<f64>, ConvergenceReport)> = (1..=task.windows)
        .into_par_iter()
        .map(|s| {
            let window = make_window(y, task, s)?;
            let (xhat, report) = impute(&window, task.season_len, config)?;
            Ok((xhat.slice(s![.., len - tau..]).to_owned(), report))
        })
        .collect::<Result<_>>()?;

    let mut values = Array2::<f64>::zeros((y.sensors(), task.windows * tau));
    let mut reports = Vec::with_capacity(task.windows);
    for (idx, (block, report)) in blocks.into_iter().enumerate() {
        values
            .slice_mut(s![.., idx * tau..(idx + 1) * tau])
            .assign(&block);
        reports.push(report);
    }
    Ok(Prediction { values, reports })
}

/// Columns of the source series covered by the forecast.
pub fn forecast_range(task: &PredictionTask) -> std::ops::Range<usize> {
    task.train_end..task.train_end + task.windows * task.horizon
}
