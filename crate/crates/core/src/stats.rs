//! Standard errors and running-estimate convergence checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CONVERGENCE_WINDOW: usize = 50;

/// Standard error of a Bernoulli proportion `p` estimated from `n` trials.
pub fn bernoulli_se(p: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("standard error needs at least one trial"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("proportion {p} outside [0, 1]")));
    }
    Ok((p * (1.0 - p) / n as f64).sqrt())
}

/// Success counter that remembers the running mean after every trial.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningEstimate {
    pub successes: u64,
    pub trials: u64,
    pub history: Vec<f64>,
}

impl RunningEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_outcomes(outcomes: impl IntoIterator<Item = bool>) -> Self {
        let mut est = Self::new();
        for o in outcomes {
            est.push(o);
        }
        est
    }

    pub fn push(&mut self, success: bool) {
        self.trials += 1;
        self.successes += success as u64;
        self.history.push(self.mean().unwrap_or(0.0));
    }

    pub fn mean(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.successes as f64 / self.trials as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub window: usize,
    pub tolerance: f64,
    pub final_mean: f64,
    /// Max minus min of the running mean over the window.
    pub spread: f64,
}

/// Checks that the running mean moves by at most `tolerance` (max minus min)
/// over the last `window` trials. The default tolerance is twice the standard
/// error of the final estimate.
pub fn convergence_check(
    est: &RunningEstimate,
    window: usize,
    tolerance: Option<f64>,
) -> Result<ConvergenceReport> {
    if window == 0 {
        return Err(Error::domain("convergence window must be at least 1"));
    }
    if (est.trials as usize) < window || est.history.len() < window {
        return Err(Error::IncompleteData(format!(
            "{} trials, window needs {window}",
            est.trials
        )));
    }
    let final_mean = est.mean().unwrap_or(0.0);
    let tolerance = match tolerance {
        Some(t) if t < 0.0 => return Err(Error::domain("tolerance must be non-negative")),
        Some(t) => t,
        None => 2.0 * bernoulli_se(final_mean, est.trials)?,
    };
    let tail = &est.history[est.history.len() - window..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    Ok(ConvergenceReport {
        converged: spread <= tolerance,
        window,
        tolerance,
        final_mean,
        spread,
    })
}
