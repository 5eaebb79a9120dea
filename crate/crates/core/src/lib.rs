//! Low-rank autoregressive tensor completion for multivariate time series.
//!
//! A sensor-by-time matrix is folded into a `sensor x time-of-day x day`
//! tensor. Missing entries are recovered by ADMM on a low-rank objective
//! (nuclear or truncated nuclear norm over all three unfoldings) coupled with
//! a per-series autoregressive penalty on the matrix form. Forecasting is the
//! same completion problem with the future block masked.
//!
//! ```no_run
//! use latc_core::{impute, LagSet, SolverConfig, TimeSeriesMatrix};
//! # fn data() -> TimeSeriesMatrix { unimplemented!() }
//! let y = data(); // M x (I*J), unobserved cells masked out
//! let config = SolverConfig {
//!     theta: 3,
//!     lags: Some(LagSet::seasonal_default(24).unwrap()),
//!     ..SolverConfig::default()
//! };
//! let (recovered, report) = impute(&y, 24, &config).unwrap();
//! println!("{} iterations, converged: {}", report.iterations, report.converged);
//! # let _ = recovered;
//! ```

pub mod ar;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod prox;
pub mod rolling;
pub mod scenario;
pub mod series;
pub mod solver;
pub mod tensor;

pub use ar::{
    ar_norm, build_design, fit_coefficients, fit_coefficients_with_cutoff, ArCoefficients, LagSet,
};
pub use error::{ErrorClass, LatcError, Result};
pub use metrics::{mape, rmse, score_masked, Scores};
pub use prox::{svt, svt_truncated, ShrinkageSpec};
pub use rolling::{make_window, predict, Prediction, PredictionTask};
pub use scenario::{apply_mask, MissingKind, MissingScenario, NmFiber};
pub use series::{trim_to_seasons, TimeSeriesMatrix};
pub use solver::{
    enforce_observations, impute, update_coefficients, update_duals, update_x, update_z_head,
    update_z_tail, ConvergenceReport, Imputer, SolverConfig, SolverState,
};
pub use tensor::{fold, to_matrix, to_tensor, unfold, Dims, Tensor3};
