//! Per-trader inventory and wealth reconstruction.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::tape::TradeRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Inventory,
    Wealth,
}

/// How wealth is read off a trade sequence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WealthConvention {
    /// `x_i = Σ_{j≤i} (q_j − q_{j−1}) s_j`, the algebraic sum of payments.
    #[default]
    PaymentSum,
    /// Cash plus inventory marked at the latest trade price:
    /// `x_i = −Σ_{j≤i} (q_j − q_{j−1}) s_j + q_i s_i`.
    CashPlusMark,
}

/// Asynchronously observed path of one trader's inventory or wealth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    kind: PathKind,
    session_length: f64,
    /// Value of the process before the first observation.
    #[serde(default)]
    initial_value: f64,
}

impl PathSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        kind: PathKind,
        session_length: f64,
        initial_value: f64,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid("values", "length differs from times"));
        }
        if !(session_length.is_finite() && session_length > 0.0) {
            return Err(Error::invalid("session_length", "must be positive"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("times", "must be strictly increasing"));
        }
        if times.iter().any(|t| !(*t >= 0.0 && *t <= session_length)) {
            return Err(Error::invalid("times", "must lie in [0, session_length]"));
        }
        if values.iter().any(|v| !v.is_finite()) || !initial_value.is_finite() {
            return Err(Error::invalid("values", "must be finite"));
        }
        Ok(Self {
            times,
            values,
            kind,
            session_length,
            initial_value,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn session_length(&self) -> f64 {
        self.session_length
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Two-column `time,value` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "value"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        input: R,
        kind: PathKind,
        session_length: f64,
        initial_value: f64,
    ) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for row in r.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let num = |i: usize| -> Result<f64> {
                row.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::UnparsableRow {
                        line,
                        reason: format!("column {i} is not a number"),
                    })
            };
            times.push(num(0)?);
            values.push(num(1)?);
        }
        Self::new(times, values, kind, session_length, initial_value)
    }
}

/// One aggregated observation of a trader on the tape.
#[derive(Debug, Clone, PartialEq)]
pub struct TraderObservation {
    pub time: f64,
    /// Net signed shares (+ bought, − sold) at this timestamp.
    pub signed_size: f64,
    /// Size-weighted average trade price at this timestamp.
    pub price: f64,
    /// `Σ signed_size_k · price_k` over the aggregated trades.
    pub payment: f64,
}

/// Collapse a trader's trades into one observation per distinct timestamp.
///
/// A trade where the trader is on both sides contributes zero net size.
pub fn trader_observations(records: &[TradeRecord], trader: &str) -> Result<Vec<TraderObservation>> {
    let mut out: Vec<TraderObservation> = Vec::new();
    let mut gross = 0.0;
    let mut notional = 0.0;
    for rec in records {
        let sign = match (rec.buyer_id == trader, rec.seller_id == trader) {
            (true, false) => 1.0,
            (false, true) => -1.0,
            (true, true) => 0.0,
            (false, false) => continue,
        };
        let size = rec.size as f64;
        let same_time = out.last().is_some_and(|o| o.time == rec.timestamp);
        if !same_time {
            gross = 0.0;
            notional = 0.0;
            out.push(TraderObservation {
                time: rec.timestamp,
                signed_size: 0.0,
                price: rec.price,
                payment: 0.0,
            });
        }
        let obs = out.last_mut().expect("pushed above");
        obs.signed_size += sign * size;
        obs.payment += sign * size * rec.price;
        gross += size;
        notional += size * rec.price;
        obs.price = notional / gross;
    }
    if out.is_empty() {
        return Err(Error::TraderNotFound(trader.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraderPathConfig {
    pub wealth_convention: WealthConvention,
    pub initial_inventory: f64,
    /// Session length T in seconds. Defaults to the last tape timestamp.
    pub session_length: Option<f64>,
}

impl Default for TraderPathConfig {
    fn default() -> Self {
        Self {
            wealth_convention: WealthConvention::PaymentSum,
            initial_inventory: 0.0,
            session_length: None,
        }
    }
}

/// Inventory and wealth paths of `trader`, one point per aggregated trade time.
///
/// `records` must be sorted by timestamp (as returned by `parse_tape`).
pub fn build_trader_paths(
    records: &[TradeRecord],
    trader: &str,
    cfg: &TraderPathConfig,
) -> Result<(PathSeries, PathSeries)> {
    let obs = trader_observations(records, trader)?;
    let session = match cfg.session_length {
        Some(t) => t,
        None => records.last().map_or(0.0, |r| r.timestamp),
    };
    // A tape with a single instant still needs a positive horizon.
    let session = if session > 0.0 { session } else { 1.0 };

    let times: Vec<f64> = obs.iter().map(|o| o.time).collect();
    let mut inventory = Vec::with_capacity(obs.len());
    let mut wealth = Vec::with_capacity(obs.len());
    let mut q = cfg.initial_inventory;
    let mut paid = 0.0;
    for o in &obs {
        q += o.signed_size;
        paid += o.payment;
        inventory.push(q);
        wealth.push(match cfg.wealth_convention {
            WealthConvention::PaymentSum => paid,
            WealthConvention::CashPlusMark => -paid + q * o.price,
        });
    }
    let x0 = match cfg.wealth_convention {
        WealthConvention::PaymentSum => 0.0,
        WealthConvention::CashPlusMark => cfg.initial_inventory * obs[0].price,
    };
    Ok((
        PathSeries::new(times.clone(), inventory, PathKind::Inventory, session, cfg.initial_inventory)?,
        PathSeries::new(times, wealth, PathKind::Wealth, session, x0)?,
    ))
}

/// True when the path has at least `min_rate` observations per minute on average.
pub fn activity_filter(path: &PathSeries, min_rate: f64) -> bool {
    let required = min_rate * path.session_length() / 60.0;
    path.len() as f64 >= required
}
