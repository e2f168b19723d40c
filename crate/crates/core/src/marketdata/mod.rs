//! Trade tapes, per-trader paths, and their increments.

mod paths;
mod resample;
mod tape;

pub use paths::{
    activity_filter, build_trader_paths, trader_observations, PathKind, PathSeries, TraderObservation,
    TraderPathConfig, WealthConvention,
};
pub use resample::{async_increments, resample_regular, IncrementSeries};
pub use tape::{parse_tape, parse_timestamp, TapeFormat, TradeRecord};

/// Records for one symbol, preserving order.
pub fn filter_symbol(records: &[TradeRecord], symbol: &str) -> Vec<TradeRecord> {
    records.iter().filter(|r| r.symbol == symbol).cloned().collect()
}
