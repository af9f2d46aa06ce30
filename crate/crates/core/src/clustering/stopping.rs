//! Stopping rules: average movement below `epsilon`, or the Shannon entropy
//! of the per-point movement histogram settling to within `gamma`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Why an iteration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Movement,
    Entropy,
    MaxIter,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Movement => "movement",
            StopReason::Entropy => "entropy",
            StopReason::MaxIter => "max_iter",
        })
    }
}

/// Shannon entropy (natural log) of the histogram of `movements`.
///
/// Uses `S = max(1, floor(bins_fraction * N))` equal-width bins over
/// `[0, max(movements)]`; the maximum falls in the last bin. When every
/// movement is zero there is a single occupied bin and the entropy is 0.
pub fn movement_entropy(movements: &[f64], bins_fraction: f64) -> Result<f64> {
    let n = movements.len();
    if n < 2 {
        return Err(Error::invalid(format!("entropy needs at least 2 movements, got {n}")));
    }
    if !(bins_fraction > 0.0 && bins_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "bins fraction must be in (0, 1], got {bins_fraction}"
        )));
    }
    if let Some(m) = movements.iter().find(|m| !m.is_finite() || **m < 0.0) {
        return Err(Error::invalid(format!(
            "movements must be finite and nonnegative, got {m}"
        )));
    }
    let bins = ((bins_fraction * n as f64).floor() as usize).max(1);
    let max = movements.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    let mut counts = vec![0usize; bins];
    for &m in movements {
        let idx = ((m / max) * bins as f64).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let total = n as f64;
    Ok(-counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>())
}

/// The combined rule `delta_t < epsilon OR |H_curr - H_prev| < gamma`.
///
/// `entropy_prev` is `None` on the first iteration, when only the movement
/// branch can fire. Movement takes precedence when both fire.
pub fn should_stop(
    delta_t: f64,
    entropy_prev: Option<f64>,
    entropy_curr: f64,
    epsilon: f64,
    gamma: f64,
) -> Option<StopReason> {
    if delta_t < epsilon {
        return Some(StopReason::Movement);
    }
    match entropy_prev {
        Some(prev) if (entropy_curr - prev).abs() < gamma => Some(StopReason::Entropy),
        _ => None,
    }
}

/// Feeds successive `(delta_t, H_t)` pairs through [`should_stop`].
#[derive(Debug, Clone)]
pub struct StoppingMonitor {
    epsilon: f64,
    gamma: f64,
    prev_entropy: Option<f64>,
}

impl StoppingMonitor {
    pub fn new(epsilon: f64, gamma: f64) -> Self {
        StoppingMonitor {
            epsilon,
            gamma,
            prev_entropy: None,
        }
    }

    pub fn observe(&mut self, delta_t: f64, entropy: f64) -> Option<StopReason> {
        let verdict = should_stop(delta_t, self.prev_entropy, entropy, self.epsilon, self.gamma);
        self.prev_entropy = Some(entropy);
        verdict
    }
}
