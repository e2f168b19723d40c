use serde::{Deserialize, Serialize};

use super::paths::PathSeries;
use crate::error::{Error, Result};

/// Increments of a path together with the lengths of the intervals they span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    pub interval_lengths: Vec<f64>,
    pub increments: Vec<f64>,
    /// Session horizon T in seconds.
    pub horizon: f64,
}

impl IncrementSeries {
    pub fn new(interval_lengths: Vec<f64>, increments: Vec<f64>, horizon: f64) -> Result<Self> {
        if interval_lengths.len() != increments.len() {
            return Err(Error::invalid("increments", "length differs from interval_lengths"));
        }
        if interval_lengths.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::invalid("interval_lengths", "must be positive"));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("increments", "must be finite"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        Ok(Self {
            interval_lengths,
            increments,
            horizon,
        })
    }

    /// `n` equal intervals of length `delta`.
    pub fn regular(delta: f64, increments: Vec<f64>) -> Result<Self> {
        let n = increments.len();
        Self::new(vec![delta; n], increments, delta * n.max(1) as f64)
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Total time covered by the increments, `Σ Δ(n,i)`.
    pub fn span(&self) -> f64 {
        self.interval_lengths.iter().sum()
    }

    /// The common interval length, if all intervals agree to 1e-9 relative.
    pub fn common_interval(&self) -> Option<f64> {
        let first = *self.interval_lengths.first()?;
        self.interval_lengths
            .iter()
            .all(|d| (d - first).abs() <= 1e-9 * first)
            .then_some(first)
    }
}

/// Sample the path on the grid `t_k = k·bin`, `k = 0..=⌊T/bin⌋`, carrying the
/// last observation forward, and return the grid differences.
pub fn resample_regular(path: &PathSeries, bin_seconds: f64) -> Result<IncrementSeries> {
    if !(bin_seconds.is_finite() && bin_seconds > 0.0) {
        return Err(Error::invalid("bin_seconds", "must be positive"));
    }
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let session = path.session_length();
    if bin_seconds > session {
        return Err(Error::BinLargerThanSession {
            bin: bin_seconds,
            session,
        });
    }
    // Tolerate representation error in T/bin (e.g. 0.3 / 0.1).
    let n_bins = (session / bin_seconds * (1.0 + 1e-12)).floor() as usize;

    let times = path.times();
    let values = path.values();
    let mut cursor = 0;
    let mut current = path.initial_value();
    let mut grid = Vec::with_capacity(n_bins + 1);
    for k in 0..=n_bins {
        let t = k as f64 * bin_seconds;
        while cursor < times.len() && times[cursor] <= t {
            current = values[cursor];
            cursor += 1;
        }
        grid.push(current);
    }
    let increments: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    IncrementSeries::new(vec![bin_seconds; n_bins], increments, session)
}

/// Increments between consecutive observations of an asynchronous path.
pub fn async_increments(path: &PathSeries) -> Result<IncrementSeries> {
    if path.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: path.len(),
        });
    }
    let t = path.times();
    let v = path.values();
    let interval_lengths = t.windows(2).map(|w| w[1] - w[0]).collect();
    let increments = v.windows(2).map(|w| w[1] - w[0]).collect();
    IncrementSeries::new(interval_lengths, increments, path.session_length())
}
