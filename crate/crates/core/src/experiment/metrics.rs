//! Accuracy curves and their summary statistics.

use std::time::Duration;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// Online chunks learned so far; 0 is right after initialization.
    pub chunk_index: usize,
    pub seen_samples: usize,
    pub test_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    pub trial: usize,
    pub trial_seed: u64,
    pub curve: Vec<CurvePoint>,
    /// `None` when the curve is too short (batch training).
    pub tail_std: Option<f64>,
    pub wall_time: Duration,
}

impl TrialMetrics {
    pub fn final_accuracy(&self) -> f64 {
        self.curve.last().map_or(f64::NAN, |p| p.test_accuracy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    /// Report label, also used in curve file names.
    pub label: String,
    /// `None` for models the forgetting factor does not affect.
    pub gamma: Option<f64>,
    pub master_seed: u64,
    pub trials: Vec<TrialMetrics>,
    pub mean_final_accuracy: f64,
    /// Mean of the per-trial tail deviations.
    pub tail_std: Option<f64>,
}

impl RunMetrics {
    pub fn aggregate(label: String, gamma: Option<f64>, master_seed: u64, trials: Vec<TrialMetrics>) -> Self {
        let n = trials.len() as f64;
        let mean_final_accuracy = trials.iter().map(TrialMetrics::final_accuracy).sum::<f64>() / n;
        let tails: Option<Vec<f64>> = trials.iter().map(|t| t.tail_std).collect();
        let tail_std = tails.map(|t| t.iter().sum::<f64>() / n);
        RunMetrics {
            label,
            gamma,
            master_seed,
            trials,
            mean_final_accuracy,
            tail_std,
        }
    }

    /// Equality ignoring wall time.
    pub fn same_results(&self, other: &RunMetrics) -> bool {
        let strip = |m: &RunMetrics| {
            let mut m = m.clone();
            m.trials.iter_mut().for_each(|t| t.wall_time = Duration::ZERO);
            m
        };
        strip(self) == strip(other)
    }
}

/// Sample standard deviation of `curve[len/2..]`.
pub fn compute_tail_std(curve: &[f64]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::Parameter(format!(
            "tail deviation needs at least 2 points, got {}",
            curve.len()
        )));
    }
    let tail = &curve[curve.len() / 2..];
    if tail.len() < 2 {
        return Ok(0.0);
    }
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let ss: f64 = tail.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}
