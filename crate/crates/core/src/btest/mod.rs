//! Tests for the presence of a Brownian component in a trader's path.

mod batch;
mod estimators;
mod moments;
mod sweep;

pub use batch::{batch_runner, BatchAccumulator, BatchConfig, BatchReport, CellSummary, DayTape};
pub use estimators::{
    augment_with_draws, estimate_eta, fictitious_augment, power_variation, truncated_quarticity,
    truncated_realized_volatility, truncation_level, EtaEstimator,
};
pub use moments::{normal_abs_moment, normal_cdf, normal_sf, upper_quantile};
pub use sweep::{sensitivity_sweep, write_sweep_csv, SweepPoint};
pub use test::{async_test, regular_test, RegularTestConfig, TestKind, TestResult};
