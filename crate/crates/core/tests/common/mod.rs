//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the solver internals: tensors are stored as
//! row-major `[m][i][j]` vectors, unfoldings use the general Kolda index
//! formula, and SVDs go straight to nalgebra without any reordering tricks.

#![allow(dead_code)]

use latc_core::{Tensor3, TimeSeriesMatrix};
use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

pub fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `||a - b||_F / max(||b||_F, 1e-300)`.
pub fn rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let d = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    d / frob(b).max(1e-300)
}

// ---------------------------------------------------------------------------
// Plain tensors
// ---------------------------------------------------------------------------

/// Row-major `[m][i][j]` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct RefTensor {
    pub dims: [usize; 3],
    pub data: Vec<f64>,
}

impl RefTensor {
    pub fn zeros(dims: [usize; 3]) -> Self {
        RefTensor {
            dims,
            data: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    fn idx(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2]
    }

    pub fn get(&self, idx: [usize; 3]) -> f64 {
        self.data[self.idx(idx)]
    }

    pub fn set(&mut self, idx: [usize; 3], v: f64) {
        let p = self.idx(idx);
        self.data[p] = v;
    }

    pub fn indices(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(self.data.len());
        for a in 0..self.dims[0] {
            for b in 0..self.dims[1] {
                for c in 0..self.dims[2] {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    pub fn from_tensor(t: &Tensor3) -> Self {
        let d = t.dims();
        let mut r = RefTensor::zeros([d.sensors, d.season_len, d.seasons]);
        for idx in r.indices() {
            r.set(idx, t.get(idx[0], idx[1], idx[2]));
        }
        r
    }

    pub fn to_tensor(&self) -> Tensor3 {
        let dims = latc_core::Dims::new(self.dims[0], self.dims[1], self.dims[2]);
        Tensor3::from_fn(dims, |m, i, j| self.get([m, i, j])).unwrap()
    }

    pub fn combine(&self, other: &RefTensor, f: impl Fn(f64, f64) -> f64) -> RefTensor {
        RefTensor {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Column of entry `idx` in the mode-`k` unfolding (1-based `k`), from the
/// general formula `sum_{n != k} i_n * prod_{m < n, m != k} I_m`.
pub fn kolda_column(dims: [usize; 3], k: usize, idx: [usize; 3]) -> usize {
    let mut col = 0;
    let mut stride = 1;
    for n in 0..3 {
        if n == k - 1 {
            continue;
        }
        col += idx[n] * stride;
        stride *= dims[n];
    }
    col
}

pub fn ref_unfold(t: &RefTensor, k: usize) -> Array2<f64> {
    let rows = t.dims[k - 1];
    let cols = t.data.len() / rows;
    let mut out = Array2::zeros((rows, cols));
    for idx in t.indices() {
        out[[idx[k - 1], kolda_column(t.dims, k, idx)]] = t.get(idx);
    }
    out
}

pub fn ref_fold(mat: &Array2<f64>, k: usize, dims: [usize; 3]) -> RefTensor {
    let mut t = RefTensor::zeros(dims);
    for idx in t.indices() {
        t.set(idx, mat[[idx[k - 1], kolda_column(dims, k, idx)]]);
    }
    t
}

/// `Q`: time point `t` goes to (t mod I, t div I).
pub fn ref_q(z: &Array2<f64>, season: usize) -> RefTensor {
    let (m, n) = z.dim();
    let mut t = RefTensor::zeros([m, season, n / season]);
    for row in 0..m {
        for col in 0..n {
            t.set([row, col % season, col / season], z[[row, col]]);
        }
    }
    t
}

pub fn ref_qinv(t: &RefTensor) -> Array2<f64> {
    let [m, i, j] = t.dims;
    Array2::from_shape_fn((m, i * j), |(row, col)| t.get([row, col % i, col / i]))
}

// ---------------------------------------------------------------------------
// Spectral helpers
// ---------------------------------------------------------------------------

fn to_dm(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[[r, c]])
}

fn from_dm(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(r, c)| a[(r, c)])
}

pub fn sorted_singular_values(a: &Array2<f64>) -> Vec<f64> {
    if a.nrows().min(a.ncols()) == 0 {
        return vec![];
    }
    let mut sv: Vec<f64> = to_dm(a).singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Straightforward generalized SVT on the matrix as given.
pub fn ref_svt(z: &Array2<f64>, tau: f64, theta: usize) -> Array2<f64> {
    let svd = to_dm(z).svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let mut out = DMatrix::<f64>::zeros(z.nrows(), z.ncols());
    for (rank, &p) in order.iter().enumerate() {
        let shrunk = if rank < theta {
            s[p]
        } else {
            (s[p] - tau).max(0.0)
        };
        out += shrunk * u.column(p) * vt.row(p);
    }
    from_dm(&out)
}

/// `tau * ||X||_{theta,*} + 1/2 ||X - Z||_F^2`.
pub fn prox_objective(x: &Array2<f64>, z: &Array2<f64>, tau: f64, theta: usize) -> f64 {
    let tnn: f64 = sorted_singular_values(x).iter().skip(theta).sum();
    let fit: f64 = x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    tau * tnn + 0.5 * fit
}

/// Minimizes `tau ||X||_* + 1/2 ||X - W||_F^2` without any SVD, through the
/// factored form `min_{L,R} tau/2 (||L||^2 + ||R||^2) + 1/2 ||L R^T - W||^2`
/// and gradient descent with backtracking.
pub fn factored_nuclear_prox(
    w: &Array2<f64>,
    tau: f64,
    max_iters: usize,
    seed: u64,
) -> Array2<f64> {
    let (m, n) = w.dim();
    let r = m.min(n);
    let wd = to_dm(w);
    let mut rng = rng(seed);
    let scale = (frob(w) / (r as f64)).sqrt().max(1e-3) / (m.max(n) as f64).sqrt();
    let mut l = DMatrix::from_fn(m, r, |_, _| scale * rng.random_range(-1.0..1.0));
    let mut rr = DMatrix::from_fn(n, r, |_, _| scale * rng.random_range(-1.0..1.0));

    let objective = |l: &DMatrix<f64>, rr: &DMatrix<f64>| {
        let resid = l * rr.transpose() - &wd;
        0.5 * tau * (l.norm_squared() + rr.norm_squared()) + 0.5 * resid.norm_squared()
    };
    let mut f = objective(&l, &rr);
    let mut step = 1.0 / (1.0 + wd.norm());
    for _ in 0..max_iters {
        let resid = &l * rr.transpose() - &wd;
        let gl = tau * &l + &resid * &rr;
        let gr = tau * &rr + resid.transpose() * &l;
        let gnorm2 = gl.norm_squared() + gr.norm_squared();
        if gnorm2 < 1e-26 {
            break;
        }
        step *= 2.0;
        loop {
            let l_new = &l - step * &gl;
            let r_new = &rr - step * &gr;
            let f_new = objective(&l_new, &r_new);
            if f_new <= f - 0.5 * step * gnorm2 || step < 1e-16 {
                l = l_new;
                rr = r_new;
                f = f_new;
                break;
            }
            step *= 0.5;
        }
    }
    from_dm(&(l * rr.transpose()))
}

/// Top-`theta` singular vector pairs from eigenvectors of `X^T X`.
fn top_pairs(x: &Array2<f64>, theta: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let xd = to_dm(x);
    let gram = xd.transpose() * &xd;
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut a = DMatrix::zeros(x.nrows(), theta);
    let mut b = DMatrix::zeros(x.ncols(), theta);
    for (c, &p) in order.iter().take(theta).enumerate() {
        let v = eig.eigenvectors.column(p).into_owned();
        let u = &xd * &v;
        let s = u.norm();
        b.set_column(c, &v);
        if s > 0.0 {
            a.set_column(c, &(u / s));
        }
    }
    (a, b)
}

/// Generic minimizer of `tau ||X||_{theta,*} + 1/2 ||X - Z||^2`.
///
/// The truncated norm is written as `||X||_* - max tr(A^T X B)`; alternating
/// between the best `(A, B)` for the current `X` and the convex problem in
/// `X` for fixed `(A, B)` (solved by [`factored_nuclear_prox`]) decreases the
/// objective monotonically.
pub fn generic_prox_minimizer(
    z: &Array2<f64>,
    tau: f64,
    theta: usize,
    inner_iters: usize,
    seed: u64,
) -> Array2<f64> {
    if theta == 0 {
        return factored_nuclear_prox(z, tau, inner_iters, seed);
    }
    let mut x = z.clone();
    let mut best = (prox_objective(&x, z, tau, theta), x.clone());
    for outer in 0..4 {
        let (a, b) = top_pairs(&x, theta);
        let shift = from_dm(&(tau * a * b.transpose()));
        let w = z + &shift;
        x = factored_nuclear_prox(&w, tau, inner_iters, seed + outer);
        let f = prox_objective(&x, z, tau, theta);
        if f < best.0 {
            best = (f, x.clone());
        }
    }
    best.1
}

// ---------------------------------------------------------------------------
// ADMM step oracles
// ---------------------------------------------------------------------------

/// Per-entry evaluation of the low-rank step for mode `k`.
pub fn oracle_update_x(
    z: &Array2<f64>,
    dual: &RefTensor,
    season: usize,
    k: usize,
    shrink: f64,
    theta: usize,
    rho: f64,
) -> RefTensor {
    let qz = ref_q(z, season);
    let arg = qz.combine(dual, |q, t| q - t / rho);
    ref_fold(&ref_svt(&ref_unfold(&arg, k), shrink, theta), k, qz.dims)
}

/// Per-entry `1/3 sum_k (X_k + T_k/rho)` on columns `< hd`.
pub fn oracle_z_head(x: &[RefTensor; 3], t: &[RefTensor; 3], rho: f64, hd: usize) -> Array2<f64> {
    let [m, i, _] = x[0].dims;
    Array2::from_shape_fn((m, hd), |(row, col)| {
        let idx = [row, col % i, col / i];
        (0..3)
            .map(|k| x[k].get(idx) + t[k].get(idx) / rho)
            .sum::<f64>()
            / 3.0
    })
}

/// Per-entry tail update; the AR prediction is summed directly from the
/// lagged entries of `xhat = sum_k alpha_k X_k`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_z_tail(
    x: &[RefTensor; 3],
    t: &[RefTensor; 3],
    alpha: [f64; 3],
    a: &Array2<f64>,
    lags: &[usize],
    rho: f64,
    lambda: f64,
) -> Array2<f64> {
    let [m, i, j] = x[0].dims;
    let n = i * j;
    let hd = *lags.last().unwrap();
    let xhat = |row: usize, col: usize| -> f64 {
        let idx = [row, col % i, col / i];
        (0..3).map(|k| alpha[k] * x[k].get(idx)).sum()
    };
    Array2::from_shape_fn((m, n - hd), |(row, c)| {
        let col = hd + c;
        let idx = [row, col % i, col / i];
        let avg: f64 = (0..3).map(|k| rho * x[k].get(idx) + t[k].get(idx)).sum();
        let ar: f64 = lags
            .iter()
            .enumerate()
            .map(|(p, &h)| a[[row, p]] * xhat(row, col - h))
            .sum();
        avg / (3.0 * (rho + lambda)) + lambda / (rho + lambda) * ar
    })
}

/// Plain HaLRTC: nuclear-norm ADMM with equal-weight averaging and no AR
/// term. Returns the recovered matrix after every iteration.
pub fn halrtc_reference(
    y: &TimeSeriesMatrix,
    season: usize,
    alpha: [f64; 3],
    rho0: f64,
    rho_max: f64,
    iters: usize,
) -> Vec<Array2<f64>> {
    let (m, n) = y.values().dim();
    let dims = [m, season, n / season];
    let mut z = Array2::from_shape_fn((m, n), |(r, c)| {
        if y.mask()[[r, c]] {
            y.values()[[r, c]]
        } else {
            0.0
        }
    });
    let mut t = [
        RefTensor::zeros(dims),
        RefTensor::zeros(dims),
        RefTensor::zeros(dims),
    ];
    let mut rho = rho0;
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        let x: Vec<RefTensor> = (1..=3)
            .map(|k| oracle_update_x(&z, &t[k - 1], season, k, alpha[k - 1] / rho, 0, rho))
            .collect();
        let xhat = Array2::from_shape_fn((m, n), |(r, c)| {
            let idx = [r, c % season, c / season];
            (0..3).map(|k| alpha[k] * x[k].get(idx)).sum::<f64>()
        });
        history.push(xhat);
        for r in 0..m {
            for c in 0..n {
                if !y.mask()[[r, c]] {
                    let idx = [r, c % season, c / season];
                    z[[r, c]] = (0..3)
                        .map(|k| x[k].get(idx) + t[k].get(idx) / rho)
                        .sum::<f64>()
                        / 3.0;
                }
            }
        }
        let qz = ref_q(&z, season);
        for k in 0..3 {
            for idx in qz.indices() {
                let v = t[k].get(idx) + rho * (x[k].get(idx) - qz.get(idx));
                t[k].set(idx, v);
            }
        }
        rho = (1.05 * rho).min(rho_max);
    }
    history
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Positive rank-1 matrix whose rows share one daily profile.
pub fn seasonal_rank1(sensors: usize, season: usize, seasons: usize) -> Array2<f64> {
    let n = season * seasons;
    Array2::from_shape_fn((sensors, n), |(m, t)| {
        let scale = 1.0 + 0.25 * m as f64;
        let phase = 2.0 * std::f64::consts::PI * (t % season) as f64 / season as f64;
        scale * (10.0 + 3.0 * phase.sin() + phase.cos())
    })
}

/// Noiseless series with exact period `season`, rank above one so the
/// forecast is non-trivial.
pub fn periodic_series(sensors: usize, season: usize, seasons: usize) -> Array2<f64> {
    let n = season * seasons;
    Array2::from_shape_fn((sensors, n), |(m, t)| {
        let phase = 2.0 * std::f64::consts::PI * (t % season) as f64 / season as f64;
        50.0 + 5.0 * m as f64
            + (8.0 + m as f64) * phase.sin()
            + 3.0 * (2.0 * phase + 0.3 * m as f64).cos()
    })
}

/// Rank-3 seasonal signal plus an AR(1) residual.
pub struct SyntheticPanel {
    pub signal: Array2<f64>,
    pub observed: Array2<f64>,
    /// Marginal standard deviation of the AR(1) residual.
    pub noise_sd: f64,
}

pub fn rank3_with_ar1(
    sensors: usize,
    season: usize,
    seasons: usize,
    noise_fraction: f64,
    phi: f64,
    seed: u64,
) -> SyntheticPanel {
    let n = season * seasons;
    let mut rng = rng(seed);
    let tau = 2.0 * std::f64::consts::PI;
    let day_level: Vec<f64> = (0..seasons)
        .map(|_| 1.0 + 0.05 * rng.random_range(-1.0..1.0))
        .collect();
    let profiles = Array2::from_shape_fn((3, n), |(r, t)| {
        let phase = tau * (t % season) as f64 / season as f64;
        match r {
            0 => day_level[t / season],
            1 => phase.sin(),
            _ => (2.0 * phase).cos(),
        }
    });
    let loadings = Array2::from_shape_fn((sensors, 3), |(_, r)| match r {
        0 => 40.0 + 20.0 * rng.random::<f64>(),
        1 => 5.0 + 10.0 * rng.random::<f64>(),
        _ => 2.0 + 5.0 * rng.random::<f64>(),
    });
    let signal = loadings.dot(&profiles);
    let rms = (signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64).sqrt();
    let noise_sd = noise_fraction * rms;
    let innovation_sd = noise_sd * (1.0 - phi * phi).sqrt();
    let mut observed = signal.clone();
    for m in 0..sensors {
        let first: f64 = StandardNormal.sample(&mut rng);
        let mut e = noise_sd * first;
        for t in 0..n {
            if t > 0 {
                let eta: f64 = StandardNormal.sample(&mut rng);
                e = phi * e + innovation_sd * eta;
            }
            observed[[m, t]] += e;
        }
    }
    SyntheticPanel {
        signal,
        observed,
        noise_sd,
    }
}

pub fn column_vec(v: &[f64]) -> Array1<f64> {
    Array1::from(v.to_vec())
}
