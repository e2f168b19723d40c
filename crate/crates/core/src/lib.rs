//! Tests for a Brownian component in a trader's inventory and wealth paths,
//! and an optimal execution model whose inventory carries its own noise.
//!
//! * [`marketdata`] parses trade tapes into per-trader paths and increments.
//! * [`btest`] implements the truncated realized volatility test on regular
//!   grids and the power-variation test on asynchronous grids.
//! * [`execmodel`] solves the execution problem in closed form (or numerically
//!   when the closed form does not apply) and replays it by Monte Carlo.
//! * [`estimation`] derives the model constants from tape data.

pub mod btest;
pub mod error;
pub mod estimation;
pub mod execmodel;
pub mod marketdata;
pub mod rng;
mod serde_float;

pub use btest::{async_test, regular_test, RegularTestConfig, TestKind, TestResult};
pub use error::{Error, Result};
pub use execmodel::{Ensemble, ExecutionParams, TradeGrid};
pub use marketdata::{IncrementSeries, PathKind, PathSeries, TradeRecord};
