//! ADMM imputer for low-rank autoregressive tensor completion.
//!
//! The series matrix `Z` is folded into an `M x I x J` tensor and three
//! auxiliary copies `X_1..X_3` are each pulled towards low rank in one
//! unfolding. `Z` is then re-estimated as a compromise between the average of
//! the copies and a per-series autoregressive fit, observed entries are
//! re-imposed, and the dual tensors take an ascent step.
//!
//! Per iteration, with `lambda = c0 * rho0` (or `c0 * rho` when
//! `lambda_tracks_rho` is set):
//!
//! ```text
//! X_k  <- fold_k(D_{theta, alpha_k/rho}(unfold_k(Q(Z) - T_k/rho)))
//! Xhat <- Q^-1(sum_k alpha_k X_k)
//! Z[:, :h_d]  <- 1/3 sum_k Q^-1(X_k + T_k/rho)[:, :h_d]
//! z_m[h_d:]   <- 1/(3(rho+lambda)) sum_k Q^-1(rho X_k + T_k)_m[h_d:]
//!                + lambda/(rho+lambda) Q_m a_m        (Q_m built on Xhat)
//! P_Omega(Z)  <- P_Omega(Y)
//! a_m  <- pinv(Q_m) z_m[h_d:]
//! T_k  <- T_k + rho (X_k - Q(Z))
//! rho  <- min(1.05 rho, rho_max)
//! ```
//!
//! Iteration stops once `||Xhat_new - Xhat_old||_F / ||P_Omega(Y)||_F` drops
//! below `epsilon`, or after `max_iters` steps.

use std::time::{Duration, Instant};

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ar::{build_design, fit_coefficients_with_cutoff, ArCoefficients, LagSet};
use crate::error::{LatcError, Result};
use crate::prox::svt_truncated;
use crate::series::TimeSeriesMatrix;
use crate::tensor::{fold, to_matrix, to_tensor, unfold, Dims, Tensor3};

/// Growth factor applied to `rho` after every iteration.
pub const RHO_GROWTH: f64 = 1.05;

/// `rho_max = DEFAULT_RHO_MAX_FACTOR * rho0` unless configured.
pub const DEFAULT_RHO_MAX_FACTOR: f64 = 1e5;

/// Half-width of the uniform interval used to initialize AR coefficients.
pub const AR_INIT_SCALE: f64 = 0.01;

/// Default relative cutoff of the pseudo-inverse in the AR refit.
pub const DEFAULT_AR_RCOND: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Mode weights; nonnegative and summing to one.
    pub alpha: [f64; 3],
    pub rho0: f64,
    /// Cap on `rho`. `None` means `DEFAULT_RHO_MAX_FACTOR * rho0`.
    pub rho_max: Option<f64>,
    /// AR weight relative to `rho`.
    pub c0: f64,
    /// Number of leading singular values left unshrunk (0 = nuclear norm).
    pub theta: usize,
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// `None` selects the seasonal default for the season length in use.
    pub lags: Option<LagSet>,
    /// Recompute `lambda = c0 * rho` as `rho` grows; otherwise it stays at
    /// `c0 * rho0`. Off by default: when `lambda` grows with `rho` the AR term
    /// keeps a fixed share `c0 / (1 + c0)` of the `Z` update and the
    /// iteration tends to stall instead of settling.
    pub lambda_tracks_rho: bool,
    /// Relative singular value cutoff of the pseudo-inverse in the AR refit.
    /// The design is built on the current low-rank estimate, which early on
    /// is heavily shrunk; on clean, nearly rank-deficient data a tiny cutoff
    /// lets those weak directions produce huge coefficients.
    pub ar_rcond: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: [1.0 / 3.0; 3],
            rho0: 1e-4,
            rho_max: None,
            c0: 5.0,
            theta: 0,
            epsilon: 1e-4,
            max_iters: 200,
            seed: 0,
            lags: None,
            lambda_tracks_rho: false,
            ar_rcond: DEFAULT_AR_RCOND,
        }
    }
}

impl SolverConfig {
    pub fn rho_cap(&self) -> f64 {
        self.rho_max.unwrap_or(DEFAULT_RHO_MAX_FACTOR * self.rho0)
    }

    pub fn lambda(&self, rho: f64) -> f64 {
        if self.lambda_tracks_rho {
            self.c0 * rho
        } else {
            self.c0 * self.rho0
        }
    }

    pub fn resolved_lags(&self, season_len: usize) -> Result<LagSet> {
        match &self.lags {
            Some(l) => Ok(l.clone()),
            None => LagSet::seasonal_default(season_len),
        }
    }

    /// Checks the scalar parameters alone.
    pub fn validate(&self) -> Result<()> {
        if self.alpha.iter().any(|&a| !(a.is_finite() && a >= 0.0)) {
            return Err(LatcError::Config(format!(
                "alpha weights must be nonnegative: {:?}",
                self.alpha
            )));
        }
        let sum: f64 = self.alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(LatcError::Config(format!(
                "alpha weights must sum to 1, got {}",
                sum
            )));
        }
        if !(self.rho0.is_finite() && self.rho0 > 0.0) {
            return Err(LatcError::Config(format!(
                "rho0 must be positive, got {}",
                self.rho0
            )));
        }
        let cap = self.rho_cap();
        if !(cap.is_finite() && cap > self.rho0) {
            return Err(LatcError::Config(format!(
                "rho_max ({}) must exceed rho0 ({})",
                cap, self.rho0
            )));
        }
        if !(self.c0.is_finite() && self.c0 >= 0.0) {
            return Err(LatcError::Config(format!(
                "c0 must be nonnegative, got {}",
                self.c0
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(LatcError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.ar_rcond) {
            return Err(LatcError::Config(format!(
                "ar_rcond must lie in [0, 1), got {}",
                self.ar_rcond
            )));
        }
        if self.max_iters == 0 {
            return Err(LatcError::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Full validation against a problem of the given tensor shape.
    pub fn validate_for(&self, dims: Dims) -> Result<LagSet> {
        self.validate()?;
        let min_side = dims.min_unfolded_side();
        if self.theta >= min_side {
            return Err(LatcError::InvalidTruncation {
                theta: self.theta,
                min_dim: min_side,
            });
        }
        let lags = self.resolved_lags(dims.season_len)?;
        lags.check_len(dims.season_len * dims.seasons)?;
        Ok(lags)
    }
}

/// Outcome of an imputation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub final_rho: f64,
    pub converged: bool,
    pub wall_time: Duration,
    /// Convergence metric after each iteration.
    pub residuals: Vec<f64>,
}

/// All iterates of the ADMM loop.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: [Tensor3; 3],
    pub z: Array2<f64>,
    pub t: [Tensor3; 3],
    pub a: ArCoefficients,
    pub rho: f64,
    pub iter: usize,
    pub last_residual: f64,
    /// Recovered matrix `Q^-1(sum_k alpha_k X_k)` of the latest iteration.
    pub xhat: Array2<f64>,
    pub season_len: usize,
    pub lags: LagSet,
}

impl SolverState {
    /// Zero duals, `Z = P_Omega(Y)`, small seeded random AR coefficients.
    pub fn init(y: &TimeSeriesMatrix, season_len: usize, config: &SolverConfig) -> Result<Self> {
        let n = y.time_points();
        if season_len == 0 || n == 0 || !n.is_multiple_of(season_len) {
            return Err(LatcError::NotDivisible {
                len: n,
                season: season_len,
            });
        }
        let dims = Dims::new(y.sensors(), season_len, n / season_len);
        let lags = config.validate_for(dims)?;
        if y.observed_norm() == 0.0 {
            return Err(LatcError::AllMissing);
        }

        let z = y.observed_values();
        let zeros = Tensor3::zeros(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let a = Array2::from_shape_simple_fn((y.sensors(), lags.len()), || {
            rng.random_range(-AR_INIT_SCALE..=AR_INIT_SCALE)
        });

        Ok(SolverState {
            x: [zeros.clone(), zeros.clone(), zeros.clone()],
            t: [zeros.clone(), zeros.clone(), zeros],
            a: ArCoefficients::new(a)?,
            rho: config.rho0,
            iter: 0,
            last_residual: f64::INFINITY,
            xhat: z.clone(),
            z,
            season_len,
            lags,
        })
    }

    pub fn dims(&self) -> Dims {
        self.x[0].dims()
    }
}

/// Low-rank step for mode `k` (1-based).
pub fn update_x(state: &SolverState, k: usize, config: &SolverConfig) -> Result<Tensor3> {
    if !(1..=3).contains(&k) {
        return Err(LatcError::InvalidMode(k));
    }
    let rho = state.rho;
    let qz = to_tensor(&state.z, state.season_len)?;
    let shifted = qz.zip_map(&state.t[k - 1], |q, t| q - t / rho)?;
    let unfolded = unfold(&shifted, k)?;
    let shrunk = svt_truncated(&unfolded, config.alpha[k - 1] / rho, config.theta)?;
    fold(&shrunk, k, state.dims())
}

/// `sum_k alpha_k X_k`, returned as a series matrix.
pub fn combine(x: &[Tensor3; 3], alpha: &[f64; 3]) -> Result<Array2<f64>> {
    let partial = x[0].zip_map(&x[1], |a, b| alpha[0] * a + alpha[1] * b)?;
    let xhat = partial.zip_map(&x[2], |p, c| p + alpha[2] * c)?;
    Ok(to_matrix(&xhat))
}

/// Columns `0..h_d` of the new `Z`: the plain average of `X_k + T_k/rho`.
pub fn update_z_head(state: &SolverState, _config: &SolverConfig) -> Result<Array2<f64>> {
    let hd = state.lags.max_lag();
    let rho = state.rho;
    let mut sum = Array2::<f64>::zeros((state.z.nrows(), hd));
    for k in 0..3 {
        let xk = to_matrix(&state.x[k]);
        let tk = to_matrix(&state.t[k]);
        sum.zip_mut_with(&xk.slice(s![.., ..hd]), |acc, &x| *acc += x);
        sum.zip_mut_with(&tk.slice(s![.., ..hd]), |acc, &t| *acc += t / rho);
    }
    Ok(sum.mapv(|v| v / 3.0))
}

/// Columns `h_d..N` of the new `Z`, blending the tensor average with the AR
/// prediction `Q_m a_m` built on `state.xhat`.
pub fn update_z_tail(state: &SolverState, config: &SolverConfig) -> Result<Array2<f64>> {
    let hd = state.lags.max_lag();
    let rho = state.rho;
    let lambda = config.lambda(rho);
    let (m, n) = state.z.dim();

    let mut avg = Array2::<f64>::zeros((m, n - hd));
    for k in 0..3 {
        let xk = to_matrix(&state.x[k]);
        let tk = to_matrix(&state.t[k]);
        let xk = xk.slice(s![.., hd..]);
        let tk = tk.slice(s![.., hd..]);
        ndarray::Zip::from(&mut avg)
            .and(&xk)
            .and(&tk)
            .for_each(|acc, &x, &t| *acc += rho * x + t);
    }
    let scale = 1.0 / (3.0 * (rho + lambda));
    let ar_weight = lambda / (rho + lambda);

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|row| -> Result<Vec<f64>> {
            let design = build_design(state.xhat.row(row), &state.lags)?;
            let pred = design.dot(&state.a.row(row));
            Ok(avg
                .row(row)
                .iter()
                .zip(pred.iter())
                .map(|(&s, &p)| scale * s + ar_weight * p)
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut out = Array2::<f64>::zeros((m, n - hd));
    for (row, vals) in rows.into_iter().enumerate() {
        for (c, v) in vals.into_iter().enumerate() {
            out[[row, c]] = v;
        }
    }
    Ok(out)
}

/// Overwrites observed entries of `z` with the observations.
pub fn enforce_observations(z: &Array2<f64>, y: &TimeSeriesMatrix) -> Result<Array2<f64>> {
    if z.dim() != y.values().dim() {
        return Err(LatcError::Dimension(format!(
            "estimate is {:?} but observations are {:?}",
            z.dim(),
            y.values().dim()
        )));
    }
    let mut out = z.clone();
    ndarray::Zip::from(&mut out)
        .and(y.values())
        .and(y.mask())
        .for_each(|o, &v, &obs| {
            if obs {
                *o = v;
            }
        });
    Ok(out)
}

/// Refits every series' AR coefficients: design on `xhat`, response from `z`.
pub fn update_coefficients(state: &SolverState, config: &SolverConfig) -> Result<ArCoefficients> {
    let hd = state.lags.max_lag();
    let m = state.z.nrows();
    let rows: Vec<ndarray::Array1<f64>> = (0..m)
        .into_par_iter()
        .map(|row| {
            let design = build_design(state.xhat.row(row), &state.lags)?;
            fit_coefficients_with_cutoff(state.z.slice(s![row, hd..]), &design, config.ar_rcond)
        })
        .collect::<Result<_>>()?;
    let mut a = ArCoefficients::zeros(m, state.lags.len());
    for (row, coeffs) in rows.iter().enumerate() {
        a.set_row(row, coeffs);
    }
    Ok(a)
}

/// Dual ascent `T_k + rho (X_k - Q(Z))`.
pub fn update_duals(state: &SolverState, _config: &SolverConfig) -> Result<[Tensor3; 3]> {
    let rho = state.rho;
    let qz = to_tensor(&state.z, state.season_len)?;
    let step = |k: usize| -> Result<Tensor3> {
        let gap = state.x[k].zip_map(&qz, |x, q| x - q)?;
        state.t[k].zip_map(&gap, |t, g| t + rho * g)
    };
    Ok([step(0)?, step(1)?, step(2)?])
}

/// Stateful driver around [`SolverState`], one ADMM iteration per
/// [`step`](Imputer::step).
#[derive(Debug, Clone)]
pub struct Imputer<'a> {
    y: &'a TimeSeriesMatrix,
    config: SolverConfig,
    state: SolverState,
    observed_norm: f64,
}

impl<'a> Imputer<'a> {
    pub fn new(y: &'a TimeSeriesMatrix, season_len: usize, config: SolverConfig) -> Result<Self> {
        let state = SolverState::init(y, season_len, &config)?;
        Ok(Imputer {
            y,
            observed_norm: y.observed_norm(),
            config,
            state,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Runs one iteration and returns the convergence metric.
    pub fn step(&mut self) -> Result<f64> {
        let config = &self.config;
        let x: Vec<Tensor3> = (1..=3)
            .into_par_iter()
            .map(|k| update_x(&self.state, k, config))
            .collect::<Result<_>>()?;
        let x: [Tensor3; 3] = x.try_into().expect("three modes");
        let previous = std::mem::replace(&mut self.state.xhat, combine(&x, &config.alpha)?);
        self.state.x = x;

        let head = update_z_head(&self.state, config)?;
        let tail = update_z_tail(&self.state, config)?;
        let hd = head.ncols();
        let mut z = Array2::<f64>::zeros(self.state.z.dim());
        z.slice_mut(s![.., ..hd]).assign(&head);
        z.slice_mut(s![.., hd..]).assign(&tail);
        self.state.z = enforce_observations(&z, self.y)?;

        self.state.a = update_coefficients(&self.state, config)?;
        self.state.t = update_duals(&self.state, config)?;

        let diff = (&self.state.xhat - &previous)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let residual = diff / self.observed_norm;
        self.state.last_residual = residual;
        self.state.iter += 1;
        self.state.rho = (RHO_GROWTH * self.state.rho).min(config.rho_cap());
        log::debug!(
            "iter {} residual {:.3e} rho {:.3e}",
            self.state.iter,
            residual,
            self.state.rho
        );
        Ok(residual)
    }

    /// True once the last step moved the estimate by less than `epsilon`.
    ///
    /// An all-zero estimate never counts: with a small initial `rho` every
    /// singular value can be thresholded away for the first few iterations,
    /// which would otherwise read as a zero-length step.
    pub fn converged(&self) -> bool {
        self.state.iter > 0
            && self.state.last_residual < self.config.epsilon
            && self.state.xhat.iter().any(|&v| v != 0.0)
    }

    pub fn run(mut self) -> Result<(Array2<f64>, ConvergenceReport)> {
        let start = Instant::now();
        let mut residuals = Vec::new();
        while self.state.iter < self.config.max_iters {
            residuals.push(self.step()?);
            if self.converged() {
                break;
            }
        }
        let converged = self.converged();
        if !converged {
            log::warn!(
                "no convergence after {} iterations (residual {:.3e})",
                self.state.iter,
                self.state.last_residual
            );
        }
        let report = ConvergenceReport {
            iterations: self.state.iter,
            final_residual: self.state.last_residual,
            final_rho: self.state.rho,
            converged,
            wall_time: start.elapsed(),
            residuals,
        };
        Ok((self.state.xhat, report))
    }
}

/// Imputes the unobserved entries of `y` (whose length must be a multiple of
/// `season_len`). Non-convergence is not an error; check
/// [`ConvergenceReport::converged`].
pub fn impute(
    y: &TimeSeriesMatrix,
    season_len: usize,
    config: &SolverConfig,
) -> Result<(Array2<f64>, ConvergenceReport)> {
    Imputer::new(y, season_len, config.clone())?.run()
}
