//! Plain-text `key=value` solver configuration.
//!
//! Recognized keys: `alpha1`, `alpha2`, `alpha3`, `rho0`, `rho_max`, `c0`,
//! `theta`, `epsilon`, `max_iters`, `seed`, `lags` (comma list),
//! `lambda_tracks_rho` and `ar_rcond`. Blank lines and `#` comments are ignored.

use crate::ar::LagSet;
use crate::error::{LatcError, Result};
use crate::solver::SolverConfig;

pub const CONFIG_KEYS: [&str; 13] = [
    "alpha1",
    "alpha2",
    "alpha3",
    "rho0",
    "rho_max",
    "c0",
    "theta",
    "epsilon",
    "max_iters",
    "seed",
    "lags",
    "lambda_tracks_rho",
    "ar_rcond",
];

/// Splits config text into `(key, value)` pairs in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            LatcError::Parse(format!(
                "config line {}: expected key=value, got {:?}",
                lineno + 1,
                raw
            ))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| LatcError::Parse(format!("config key {}: bad value {:?}", key, value)))
}

/// Applies one setting on top of `config`.
pub fn apply(config: &mut SolverConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "alpha1" => config.alpha[0] = parse_num(key, value)?,
        "alpha2" => config.alpha[1] = parse_num(key, value)?,
        "alpha3" => config.alpha[2] = parse_num(key, value)?,
        "rho0" => config.rho0 = parse_num(key, value)?,
        "rho_max" => config.rho_max = Some(parse_num(key, value)?),
        "c0" => config.c0 = parse_num(key, value)?,
        "theta" => config.theta = parse_num(key, value)?,
        "epsilon" => config.epsilon = parse_num(key, value)?,
        "max_iters" => config.max_iters = parse_num(key, value)?,
        "seed" => config.seed = parse_num(key, value)?,
        "lags" => config.lags = Some(value.parse::<LagSet>()?),
        "lambda_tracks_rho" => config.lambda_tracks_rho = parse_num(key, value)?,
        "ar_rcond" => config.ar_rcond = parse_num(key, value)?,
        _ => return Err(LatcError::Config(format!("unknown config key {:?}", key))),
    }
    Ok(())
}

/// Builds a config from defaults plus `pairs`, applied in order.
pub fn from_pairs<'a, I>(pairs: I) -> Result<SolverConfig>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut config = SolverConfig::default();
    for (k, v) in pairs {
        apply(&mut config, k, v)?;
    }
    config.validate()?;
    Ok(config)
}

/// Every key with its effective value, defaults and derived values filled in.
pub fn resolved_pairs(config: &SolverConfig, season_len: usize) -> Result<Vec<(String, String)>> {
    let lags = config.resolved_lags(season_len)?;
    let values = [
        config.alpha[0].to_string(),
        config.alpha[1].to_string(),
        config.alpha[2].to_string(),
        config.rho0.to_string(),
        config.rho_cap().to_string(),
        config.c0.to_string(),
        config.theta.to_string(),
        config.epsilon.to_string(),
        config.max_iters.to_string(),
        config.seed.to_string(),
        lags.to_string(),
        config.lambda_tracks_rho.to_string(),
        config.ar_rcond.to_string(),
    ];
    Ok(CONFIG_KEYS
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), v))
        .collect())
}
