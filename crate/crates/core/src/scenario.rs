//! Synthetic missing-data patterns for evaluation.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LatcError, Result};
use crate::series::TimeSeriesMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingKind {
    /// Every entry hidden independently.
    Random,
    /// Whole fibers of the folded tensor hidden per sensor.
    NonRandom,
}

/// Which fibers a non-random pattern removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmFiber {
    /// All time points of a selected (sensor, day).
    #[default]
    WholeDay,
    /// One time of day across every day, for a selected (sensor, time of day).
    TimeOfDay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingScenario {
    pub kind: MissingKind,
    pub rate: f64,
    pub seed: u64,
    pub fiber: NmFiber,
}

impl MissingScenario {
    pub fn random(rate: f64, seed: u64) -> Self {
        MissingScenario {
            kind: MissingKind::Random,
            rate,
            seed,
            fiber: NmFiber::WholeDay,
        }
    }

    pub fn non_random(rate: f64, seed: u64) -> Self {
        MissingScenario {
            kind: MissingKind::NonRandom,
            rate,
            seed,
            fiber: NmFiber::WholeDay,
        }
    }
}

/// Hides entries of `y` according to `scenario`.
///
/// Returns the masked series and the set of entries that were hidden. Only
/// observed entries can be hidden, so the new mask and the hidden set
/// partition the original observation set.
pub fn apply_mask(
    y: &TimeSeriesMatrix,
    scenario: &MissingScenario,
    season_len: usize,
) -> Result<(TimeSeriesMatrix, Array2<bool>)> {
    if !(0.0..1.0).contains(&scenario.rate) {
        return Err(LatcError::Config(format!(
            "missing rate must lie in [0, 1), got {}",
            scenario.rate
        )));
    }
    let (m, n) = y.values().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut hide = Array2::from_elem((m, n), false);

    match scenario.kind {
        MissingKind::Random => {
            for v in hide.iter_mut() {
                *v = rng.random::<f64>() < scenario.rate;
            }
        }
        MissingKind::NonRandom => {
            if season_len == 0 || n % season_len != 0 {
                return Err(LatcError::NotDivisible {
                    len: n,
                    season: season_len,
                });
            }
            let days = n / season_len;
            for row in 0..m {
                match scenario.fiber {
                    NmFiber::WholeDay => {
                        for j in 0..days {
                            if rng.random::<f64>() < scenario.rate {
                                for i in 0..season_len {
                                    hide[[row, j * season_len + i]] = true;
                                }
                            }
                        }
                    }
                    NmFiber::TimeOfDay => {
                        for i in 0..season_len {
                            if rng.random::<f64>() < scenario.rate {
                                for j in 0..days {
                                    hide[[row, j * season_len + i]] = true;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    hide.zip_mut_with(y.mask(), |h, &obs| *h = *h && obs);
    let mut mask = y.mask().clone();
    mask.zip_mut_with(&hide, |o, &h| *o = *o && !h);
    Ok((y.with_mask(mask)?, hide))
}
