//! `latc`: mask, impute, forecast and score sensor-by-time CSV data.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latc_core::config::{from_pairs, parse_pairs};
use latc_core::io::{
    load_csv, load_mask_csv, write_long_csv, write_mask_csv, write_matrix_csv, write_series_csv,
    DatasetDescriptor,
};
use latc_core::rolling::forecast_range;
use latc_core::{
    apply_mask, impute, predict, score_masked, trim_to_seasons, ErrorClass, LatcError, MissingKind,
    MissingScenario, NmFiber, PredictionTask, Result, SolverConfig,
};
use ndarray::s;

use report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "latc",
    version,
    about = "Low-rank autoregressive tensor completion for time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hide entries of a complete series to build an evaluation scenario.
    Mask(MaskArgs),
    /// Recover the missing entries of a series.
    Impute(ImputeArgs),
    /// Rolling multi-window forecast.
    Predict(PredictArgs),
    /// Score an estimate against the truth on masked entries.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Rm,
    Nm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fiber {
    WholeDay,
    TimeOfDay,
}

#[derive(Args, Debug)]
struct MaskArgs {
    /// Sensor-by-time CSV; empty or `nan` cells are missing.
    #[arg(long = "in")]
    input: PathBuf,
    /// Season length (time points per day).
    #[arg(long = "I")]
    season_len: usize,
    /// `rm` hides single entries, `nm` hides whole blocks.
    #[arg(long, value_enum)]
    kind: Kind,
    /// Fraction of observed entries (or blocks) to hide.
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which block a non-random scenario removes.
    #[arg(long, value_enum, default_value = "whole-day")]
    fiber: Fiber,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the 0/1 matrix of hidden entries.
    #[arg(long = "truth-mask")]
    truth_mask: PathBuf,
}

/// Solver settings given on the command line; they override the config file.
#[derive(Args, Debug, Default)]
struct SolverFlags {
    /// Plain-text `key=value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mode weights as `a1,a2,a3`.
    #[arg(long)]
    alpha: Option<String>,
    /// Initial ADMM penalty.
    #[arg(long)]
    rho0: Option<f64>,
    /// Penalty cap; defaults to 1e5 times rho0.
    #[arg(long = "rho-max")]
    rho_max: Option<f64>,
    /// AR weight factor: lambda = c0 * rho0.
    #[arg(long)]
    c0: Option<f64>,
    /// Singular values kept unpenalized; 0 gives the plain nuclear norm.
    #[arg(long)]
    theta: Option<usize>,
    /// Stop once the relative change of the estimate falls below this.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Iteration limit.
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Seed for the initial AR coefficients.
    #[arg(long)]
    seed: Option<u64>,
    /// Lags as a comma list, e.g. `1,2,3,24`.
    #[arg(long)]
    lags: Option<String>,
    /// Recompute lambda from the current rho every iteration instead of rho0.
    #[arg(long = "lambda-tracks-rho")]
    lambda_tracks_rho: Option<bool>,
    /// Relative pseudo-inverse cutoff for the AR refit.
    #[arg(long = "ar-rcond")]
    ar_rcond: Option<f64>,
}

#[derive(Args, Debug)]
struct ImputeArgs {
    /// Sensor-by-time CSV; empty or `nan` cells are missing.
    #[arg(long = "in")]
    input: PathBuf,
    /// Season length (time points per day).
    #[arg(long = "I")]
    season_len: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: PathBuf,
    /// Plain-text `key: value` run report.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Sensor-by-time CSV; empty or `nan` cells are missing.
    #[arg(long = "in")]
    input: PathBuf,
    /// Season length (time points per day).
    #[arg(long = "I")]
    season_len: usize,
    /// Columns available before the first forecast block.
    #[arg(long = "t")]
    train_end: usize,
    /// Number of rolling windows.
    #[arg(long = "S")]
    windows: usize,
    /// Columns forecast per window.
    #[arg(long)]
    tau: usize,
    /// Seasons per window; defaults to as many as fit before the first block.
    #[arg(long = "J")]
    seasons: Option<usize>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: PathBuf,
    /// Plain-text `key: value` run report.
    #[arg(long)]
    report: PathBuf,
    /// Long-format `sensor,time,truth,estimate` CSV. Defaults to
    /// `<out stem>_plot.csv` next to `--out`.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Complete series.
    #[arg(long)]
    truth: PathBuf,
    /// Estimate; a shorter one is aligned with the last columns of the truth.
    #[arg(long)]
    est: PathBuf,
    /// 0/1 matrix; entries marked 1 are scored.
    #[arg(long)]
    mask: PathBuf,
    /// Output `key: value` file with MAPE, RMSE and counts.
    #[arg(long)]
    metrics: PathBuf,
}

impl SolverFlags {
    fn resolve(&self) -> Result<SolverConfig> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    LatcError::Io(std::io::Error::new(
                        e.kind(),
                        format!("{}: {}", path.display(), e),
                    ))
                })?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        let mut flag = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                pairs.push((key.to_string(), v));
            }
        };
        if let Some(alpha) = &self.alpha {
            let parts: Vec<&str> = alpha.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(LatcError::Parse(format!(
                    "--alpha needs three comma-separated weights, got {:?}",
                    alpha
                )));
            }
            for (i, p) in parts.iter().enumerate() {
                flag(&format!("alpha{}", i + 1), Some(p.to_string()));
            }
        }
        flag("rho0", self.rho0.map(|v| v.to_string()));
        flag("rho_max", self.rho_max.map(|v| v.to_string()));
        flag("c0", self.c0.map(|v| v.to_string()));
        flag("theta", self.theta.map(|v| v.to_string()));
        flag("epsilon", self.epsilon.map(|v| v.to_string()));
        flag("max_iters", self.max_iters.map(|v| v.to_string()));
        flag("seed", self.seed.map(|v| v.to_string()));
        flag("lags", self.lags.clone());
        flag(
            "lambda_tracks_rho",
            self.lambda_tracks_rho.map(|v| v.to_string()),
        );
        flag("ar_rcond", self.ar_rcond.map(|v| v.to_string()));
        from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}

fn run_mask(args: &MaskArgs) -> Result<()> {
    let y = load_csv(&DatasetDescriptor::new(&args.input, args.season_len))?;
    let kind = match args.kind {
        Kind::Rm => MissingKind::Random,
        Kind::Nm => MissingKind::NonRandom,
    };
    let fiber = match args.fiber {
        Fiber::WholeDay => NmFiber::WholeDay,
        Fiber::TimeOfDay => NmFiber::TimeOfDay,
    };
    let scenario = MissingScenario {
        kind,
        rate: args.rate,
        seed: args.seed,
        fiber,
    };
    let (masked, hidden) = apply_mask(&y, &scenario, args.season_len)?;
    write_series_csv(&masked, &args.out)?;
    write_mask_csv(&hidden, &args.truth_mask)?;
    log::info!(
        "hid {} of {} observed entries",
        hidden.iter().filter(|&&h| h).count(),
        y.observed_count()
    );
    Ok(())
}

fn run_impute(args: &ImputeArgs) -> Result<()> {
    let config = args.solver.resolve()?;
    let raw = load_csv(&DatasetDescriptor::new(&args.input, args.season_len))?;
    let y = trim_to_seasons(&raw, args.season_len)?;
    let (recovered, conv) = impute(&y, args.season_len, &config)?;
    write_matrix_csv(&recovered, &args.out)?;

    let mut report = Report::new("impute");
    report.push("input", args.input.display());
    report.push("season_len", args.season_len);
    report.push("sensors", y.sensors());
    report.push("time_points", y.time_points());
    report.push("trimmed_columns", raw.time_points() - y.time_points());
    report.config(&config, args.season_len)?;
    report.convergence(None, &conv);
    report.write(&args.report)?;
    if !conv.converged {
        eprintln!(
            "warning: no convergence after {} iterations (residual {:e}); result written anyway",
            conv.iterations, conv.final_residual
        );
    }
    Ok(())
}

fn default_plot_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{}_plot.csv", stem))
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    let config = args.solver.resolve()?;
    let y = load_csv(&DatasetDescriptor::new(&args.input, args.season_len))?;
    let task = match args.seasons {
        Some(seasons) => PredictionTask {
            train_end: args.train_end,
            windows: args.windows,
            horizon: args.tau,
            season_len: args.season_len,
            seasons,
        },
        None => PredictionTask::with_max_history(
            args.train_end,
            args.windows,
            args.tau,
            args.season_len,
        )?,
    };
    let prediction = predict(&y, &task, &config)?;
    write_matrix_csv(&prediction.values, &args.out)?;
    let plot = args
        .plot
        .clone()
        .unwrap_or_else(|| default_plot_path(&args.out));
    write_long_csv(&y, &prediction.values, task.train_end, &plot)?;

    let mut report = Report::new("predict");
    report.push("input", args.input.display());
    report.push("season_len", args.season_len);
    report.push("sensors", y.sensors());
    report.push("train_end", task.train_end);
    report.push("windows", task.windows);
    report.push("horizon", task.horizon);
    report.push("seasons_per_window", task.seasons);
    report.config(&config, args.season_len)?;
    let total: usize = prediction.reports.iter().map(|r| r.iterations).sum();
    let unconverged = prediction.reports.iter().filter(|r| !r.converged).count();
    report.push("iterations", total);
    report.push("converged", unconverged == 0);
    report.push("windows_unconverged", unconverged);
    let wall: f64 = prediction
        .reports
        .iter()
        .map(|r| r.wall_time.as_secs_f64())
        .sum();
    report.push("wall_time", format!("{:.6}", wall));
    for (s, r) in prediction.reports.iter().enumerate() {
        report.convergence(Some(s + 1), r);
    }
    // Score the forecast wherever the input holds the truth.
    let range = forecast_range(&task);
    let truth = y.values().slice(s![.., range.clone()]).to_owned();
    let observed = y.mask().slice(s![.., range]).to_owned();
    if observed.iter().any(|&o| o) {
        let scores = score_masked(&truth, &prediction.values, &observed)?;
        report.scores(&scores);
    }
    report.push("plot", plot.display());
    report.write(&args.report)?;
    if unconverged > 0 {
        eprintln!(
            "warning: {} of {} windows did not converge; forecast written anyway",
            unconverged, task.windows
        );
    }
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let truth = load_csv(&DatasetDescriptor::new(&args.truth, 1))?;
    let est = load_csv(&DatasetDescriptor::new(&args.est, 1))?;
    let mask = load_mask_csv(&args.mask)?;
    if truth.values().dim() != mask.dim() {
        return Err(LatcError::Dimension(format!(
            "truth is {:?} but mask is {:?}",
            truth.values().dim(),
            mask.dim()
        )));
    }
    if est.sensors() != truth.sensors() || est.time_points() > truth.time_points() {
        return Err(LatcError::Dimension(format!(
            "estimate is {:?}, truth is {:?}",
            est.values().dim(),
            truth.values().dim()
        )));
    }
    if est.observed_count() != est.values().len() {
        return Err(LatcError::Parse(format!(
            "{}: estimate has missing cells",
            args.est.display()
        )));
    }
    // An estimate from a trimmed series covers the trailing columns.
    let offset = truth.time_points() - est.time_points();
    let truth_vals = truth.values().slice(s![.., offset..]).to_owned();
    let mut selected = mask.slice(s![.., offset..]).to_owned();
    let dropped = mask.slice(s![.., ..offset]).iter().filter(|&&m| m).count();
    let mut missing_truth = 0;
    selected.zip_mut_with(&truth.mask().slice(s![.., offset..]), |sel, &obs| {
        if *sel && !obs {
            missing_truth += 1;
            *sel = false;
        }
    });
    let scores = score_masked(&truth_vals, est.values(), &selected)?;

    let mut report = Report::new("eval");
    report.push("truth", args.truth.display());
    report.push("estimate", args.est.display());
    report.push("mask", args.mask.display());
    report.scores(&scores);
    report.push("skipped_missing_truth", missing_truth);
    report.push("skipped_trimmed", dropped);
    report.write(&args.metrics)?;
    println!("mape: {}", scores.mape);
    println!("rmse: {}", scores.rmse);
    Ok(())
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Parse => 3,
        ErrorClass::Dimension => 4,
        ErrorClass::Config => 5,
        ErrorClass::Io => 6,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mask(a) => run_mask(a),
        Command::Impute(a) => run_impute(a),
        Command::Predict(a) => run_predict(a),
        Command::Eval(a) => run_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("error ({:?}): {}", class, e);
            ExitCode::from(exit_code(class))
        }
    }
}
