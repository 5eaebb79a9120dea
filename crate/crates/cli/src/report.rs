//! Plain-text run reports, one `key: value` per line.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use latc_core::config::resolved_pairs;
use latc_core::{ConvergenceReport, Result, Scores, SolverConfig};

pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            lines: vec![format!("command: {}", command)],
        }
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.lines.push(format!("{}: {}", key, value));
    }

    /// Every solver setting, defaults included.
    pub fn config(&mut self, config: &SolverConfig, season_len: usize) -> Result<()> {
        for (k, v) in resolved_pairs(config, season_len)? {
            self.push(&k, v);
        }
        Ok(())
    }

    /// Convergence fields, prefixed with `window.<s>.` for rolling runs.
    pub fn convergence(&mut self, window: Option<usize>, r: &ConvergenceReport) {
        let prefix = window.map(|s| format!("window.{}.", s)).unwrap_or_default();
        self.push(&format!("{}iterations", prefix), r.iterations);
        self.push(&format!("{}final_residual", prefix), r.final_residual);
        self.push(&format!("{}final_rho", prefix), r.final_rho);
        self.push(&format!("{}converged", prefix), r.converged);
        self.push(
            &format!("{}wall_time", prefix),
            format!("{:.6}", r.wall_time.as_secs_f64()),
        );
    }

    pub fn scores(&mut self, s: &Scores) {
        self.push("mape", s.mape);
        self.push("rmse", s.rmse);
        self.push("count", s.count);
        self.push("zero_truth", s.zero_truth);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}
