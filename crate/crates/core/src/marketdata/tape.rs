//! Trade tape parsing.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One executed trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    /// Seconds since session open.
    pub timestamp: f64,
    pub symbol: String,
    pub price: f64,
    pub size: u64,
    pub buyer_id: String,
    pub seller_id: String,
}

/// Column mapping and clock convention for a CSV tape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TapeFormat {
    pub timestamp_col: String,
    pub symbol_col: String,
    pub price_col: String,
    pub size_col: String,
    pub buyer_col: String,
    pub seller_col: String,
    pub delimiter: u8,
    /// Raw timestamp of the session open. When absent, the first timestamp
    /// on the tape is used as the origin.
    pub session_open: Option<f64>,
}

impl Default for TapeFormat {
    fn default() -> Self {
        Self {
            timestamp_col: "timestamp".into(),
            symbol_col: "symbol".into(),
            price_col: "price".into(),
            size_col: "size".into(),
            buyer_col: "buyer".into(),
            seller_col: "seller".into(),
            delimiter: b',',
            session_open: None,
        }
    }
}

/// Accepts plain seconds (`34200.25`) or a clock time `HH:MM:SS[.fff]`.
pub fn parse_timestamp(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let mut parts = raw.split(':');
    let h: u32 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let s: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || m >= 60 || !(0.0..60.0).contains(&s) {
        return None;
    }
    Some(f64::from(h) * 3600.0 + f64::from(m) * 60.0 + s)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Parse a CSV tape into records sorted by session time.
///
/// The sort is stable, so same-timestamp trades keep their tape order.
pub fn parse_tape<R: Read>(input: R, format: &TapeFormat) -> Result<Vec<TradeRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let cols = [
        column(&headers, &format.timestamp_col)?,
        column(&headers, &format.symbol_col)?,
        column(&headers, &format.price_col)?,
        column(&headers, &format.size_col)?,
        column(&headers, &format.buyer_col)?,
        column(&headers, &format.seller_col)?,
    ];

    let mut raw = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |reason: String| Error::UnparsableRow { line, reason };
        let field = |i: usize| row.get(cols[i]).unwrap_or("");

        let ts = parse_timestamp(field(0))
            .ok_or_else(|| bad(format!("bad timestamp `{}`", field(0))))?;
        let symbol = field(1).to_string();
        if symbol.is_empty() {
            return Err(bad("empty symbol".into()));
        }
        let price: f64 = field(2)
            .parse()
            .map_err(|_| bad(format!("bad price `{}`", field(2))))?;
        if !(price.is_finite() && price > 0.0) {
            return Err(bad(format!("price must be positive, got `{}`", field(2))));
        }
        let size = parse_size(field(3)).ok_or_else(|| bad(format!("bad size `{}`", field(3))))?;
        let buyer_id = field(4).to_string();
        let seller_id = field(5).to_string();
        if buyer_id.is_empty() || seller_id.is_empty() {
            return Err(bad("empty buyer or seller id".into()));
        }
        raw.push((line, TradeRecord {
            timestamp: ts,
            symbol,
            price,
            size,
            buyer_id,
            seller_id,
        }));
    }
    if raw.is_empty() {
        return Err(Error::EmptyTape);
    }

    let origin = format.session_open.unwrap_or_else(|| {
        raw.iter()
            .map(|(_, r)| r.timestamp)
            .fold(f64::INFINITY, f64::min)
    });
    for (line, rec) in &mut raw {
        rec.timestamp -= origin;
        if rec.timestamp < 0.0 {
            return Err(Error::UnparsableRow {
                line: *line,
                reason: "trade precedes session open".into(),
            });
        }
    }
    let mut records: Vec<TradeRecord> = raw.into_iter().map(|(_, r)| r).collect();
    records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(records)
}

fn parse_size(raw: &str) -> Option<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return (v > 0).then_some(v);
    }
    // Some vendors write sizes as "100.0".
    let v: f64 = raw.parse().ok()?;
    (v > 0.0 && v.fract() == 0.0 && v < 9.0e15).then_some(v as u64)
}
