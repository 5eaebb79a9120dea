use ndarray::Array2;

use crate::error::{LatcError, Result};

fn check_pair(truth: &[f64], est: &[f64]) -> Result<()> {
    if truth.len() != est.len() {
        return Err(LatcError::Dimension(format!(
            "{} truth values vs {} estimates",
            truth.len(),
            est.len()
        )));
    }
    Ok(())
}

/// Mean absolute percentage error, in percent. Entries whose truth is zero
/// are skipped; with no nonzero truth the result is NaN.
pub fn mape(truth: &[f64], est: &[f64]) -> Result<f64> {
    check_pair(truth, est)?;
    let (sum, n) = truth
        .iter()
        .zip(est)
        .filter(|(&x, _)| x != 0.0)
        .fold((0.0, 0usize), |(s, n), (&x, &e)| {
            (s + ((x - e) / x).abs(), n + 1)
        });
    Ok(if n == 0 {
        f64::NAN
    } else {
        100.0 * sum / n as f64
    })
}

/// Root mean squared error.
pub fn rmse(truth: &[f64], est: &[f64]) -> Result<f64> {
    check_pair(truth, est)?;
    if truth.is_empty() {
        return Err(LatcError::Dimension("rmse of an empty set".into()));
    }
    let sq: f64 = truth.iter().zip(est).map(|(x, e)| (x - e) * (x - e)).sum();
    Ok((sq / truth.len() as f64).sqrt())
}

/// Scores over a subset of entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub mape: f64,
    pub rmse: f64,
    /// Entries scored.
    pub count: usize,
    /// Entries left out of MAPE because their truth is zero.
    pub zero_truth: usize,
}

/// MAPE and RMSE over the entries where `selected` is true.
pub fn score_masked(
    truth: &Array2<f64>,
    est: &Array2<f64>,
    selected: &Array2<bool>,
) -> Result<Scores> {
    if truth.dim() != est.dim() || truth.dim() != selected.dim() {
        return Err(LatcError::Dimension(format!(
            "truth {:?}, estimate {:?} and mask {:?} differ",
            truth.dim(),
            est.dim(),
            selected.dim()
        )));
    }
    let mut t = Vec::new();
    let mut e = Vec::new();
    for ((&x, &y), &sel) in truth.iter().zip(est.iter()).zip(selected.iter()) {
        if sel {
            t.push(x);
            e.push(y);
        }
    }
    Ok(Scores {
        mape: mape(&t, &e)?,
        rmse: rmse(&t, &e)?,
        count: t.len(),
        zero_truth: t.iter().filter(|&&x| x == 0.0).count(),
    })
}
