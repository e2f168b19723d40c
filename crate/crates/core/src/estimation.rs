//! Model constants from tape data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::TradeRecord;

/// Regression coefficients linking impact to spread per unit volume.
pub const PERMANENT_IMPACT_COEF: f64 = 0.22299;
pub const TEMPORARY_IMPACT_COEF: f64 = 0.07176;
/// Days of history used for the price volatility.
pub const PRICE_VOL_HISTORY: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationInputs {
    /// Average bid–ask spread per bin.
    pub avg_bin_spread: f64,
    /// Average traded volume per bin, in shares.
    pub avg_bin_volume: f64,
    /// Bin length.
    pub dt: f64,
    /// Per-day intraday price standard deviations, most recent last.
    pub intraday_stds: Vec<f64>,
    /// Same-day inventory increments `q_i − q_{i−1}`.
    pub inventory_increments: Vec<f64>,
}

/// `(α̂, κ̂) = (0.22299, 0.07176) · (spread / volume) / dt`.
pub fn estimate_impacts(inputs: &EstimationInputs) -> Result<(f64, f64)> {
    let (spread, volume, dt) = (inputs.avg_bin_spread, inputs.avg_bin_volume, inputs.dt);
    if volume == 0.0 {
        return Err(Error::ZeroVolume);
    }
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::invalid("avg_bin_volume", "must be positive and finite"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive and finite"));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::invalid("avg_bin_spread", "must be non-negative and finite"));
    }
    let base = spread / volume / dt;
    Ok((PERMANENT_IMPACT_COEF * base, TEMPORARY_IMPACT_COEF * base))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceVol {
    pub sigma: f64,
    pub days_used: usize,
    /// Fewer than ten days were available.
    pub short_history: bool,
}

/// Mean of the per-day intraday standard deviations.
pub fn estimate_price_vol(intraday_stds: &[f64]) -> Result<PriceVol> {
    if intraday_stds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if intraday_stds.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::invalid("intraday_stds", "must be finite and non-negative"));
    }
    let n = intraday_stds.len();
    let short = n < PRICE_VOL_HISTORY;
    if short {
        log::warn!("price volatility from {n} day(s); {PRICE_VOL_HISTORY} expected");
    }
    Ok(PriceVol {
        sigma: intraday_stds.iter().sum::<f64>() / n as f64,
        days_used: n,
        short_history: short,
    })
}

/// Sample standard deviation (n − 1 denominator).
fn sample_std(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: v.len() });
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    Ok((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Standard deviation of one day's trade-to-trade price increments.
///
/// With `per_sqrt_second`, each increment is divided by the square root of
/// its elapsed time first; same-timestamp prints are then skipped.
pub fn intraday_price_std(records: &[TradeRecord], per_sqrt_second: bool) -> Result<f64> {
    let incs: Vec<f64> = records
        .windows(2)
        .filter_map(|w| {
            let ds = w[1].price - w[0].price;
            if !per_sqrt_second {
                return Some(ds);
            }
            let dt = w[1].timestamp - w[0].timestamp;
            (dt > 0.0).then(|| ds / dt.sqrt())
        })
        .collect();
    sample_std(&incs)
}

/// Sample standard deviation of the raw inventory increments.
pub fn estimate_inventory_vol(increments: &[f64]) -> Result<f64> {
    sample_std(increments)
}

/// `σ_Q / √(mean Δτ)`: the same estimate expressed per √second.
pub fn per_sqrt_second(sigma: f64, mean_interval: f64) -> Result<f64> {
    if !(mean_interval > 0.0) {
        return Err(Error::invalid("mean_interval", "must be positive"));
    }
    Ok(sigma / mean_interval.sqrt())
}

/// Total traded volume divided by the number of `bin_seconds` bins in `session`.
pub fn average_bin_volume(records: &[TradeRecord], bin_seconds: f64, session: f64) -> Result<f64> {
    if !(bin_seconds > 0.0 && session > 0.0) {
        return Err(Error::invalid("bin_seconds", "bin and session must be positive"));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let bins = (session / bin_seconds).ceil().max(1.0);
    Ok(records.iter().map(|r| r.size as f64).sum::<f64>() / bins)
}
