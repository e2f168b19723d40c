//! Per-command options. Every field is optional so that flags, a config file
//! and built-in defaults can be layered; `fill_defaults` resolves the rest.

use std::path::PathBuf;

use brownexec_core::btest::{EtaEstimator, RegularTestConfig, TestKind};
use brownexec_core::marketdata::{PathKind, TapeFormat, TraderPathConfig, WealthConvention};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::kebab;

macro_rules! fill {
    ($($field:expr => $default:expr),* $(,)?) => {
        $( if $field.is_none() { $field = Some($default); } )*
    };
}

/// Where trades come from and how a trader's paths are built.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TapeOpts {
    /// Trade tape CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tape: Option<PathBuf>,
    /// Broker id whose paths are built.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trader: Option<String>,
    /// Keep only this symbol's trades.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    /// payment-sum or cash-plus-mark.
    #[arg(long, value_parser = kebab::<WealthConvention>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wealth_convention: Option<WealthConvention>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_inventory: Option<f64>,
    /// Session length T in seconds (default: last tape timestamp).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub session_length: Option<f64>,
    /// Column names and clock origin; config file only.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tape_format: Option<TapeFormat>,
}

impl TapeOpts {
    pub fn fill_defaults(&mut self) {
        fill!(
            self.wealth_convention => WealthConvention::PaymentSum,
            self.initial_inventory => 0.0,
            self.tape_format => TapeFormat::default(),
        );
    }

    pub fn path_config(&self) -> TraderPathConfig {
        TraderPathConfig {
            wealth_convention: self.wealth_convention.unwrap_or_default(),
            initial_inventory: self.initial_inventory.unwrap_or(0.0),
            session_length: self.session_length,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TestOpts {
    /// Fictitious Brownian volatility σ′.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_prime: Option<f64>,
    /// Truncation multiplier γ.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Significance level.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_level: Option<f64>,
    /// sample-variance or bipower.
    #[arg(long, value_parser = kebab::<EtaEstimator>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_estimator: Option<EtaEstimator>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Also truncate increments in the asynchronous test.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub async_truncation: Option<bool>,
}

impl TestOpts {
    pub fn fill_defaults(&mut self) {
        let d = RegularTestConfig::default();
        fill!(
            self.sigma_prime => d.sigma_prime,
            self.gamma => d.gamma,
            self.alpha_level => d.alpha_level,
            self.eta_estimator => d.eta_estimator,
            self.seed => d.seed,
            self.async_truncation => d.async_truncation,
        );
    }

    pub fn config(&self) -> RegularTestConfig {
        let d = RegularTestConfig::default();
        RegularTestConfig {
            sigma_prime: self.sigma_prime.unwrap_or(d.sigma_prime),
            gamma: self.gamma.unwrap_or(d.gamma),
            alpha_level: self.alpha_level.unwrap_or(d.alpha_level),
            eta_estimator: self.eta_estimator.unwrap_or(d.eta_estimator),
            seed: self.seed.unwrap_or(d.seed),
            async_truncation: self.async_truncation.unwrap_or(d.async_truncation),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsOpts {
    #[command(flatten)]
    #[serde(flatten)]
    pub tape: TapeOpts,
}

/// Options shared by the two tests and the sweep.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TestRunOpts {
    #[command(flatten)]
    #[serde(flatten)]
    pub tape: TapeOpts,
    /// Read a `time,value` path CSV instead of a tape.
    #[arg(long, conflicts_with = "tape")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// inventory or wealth.
    #[arg(long, value_parser = kebab::<PathKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<PathKind>,
    /// Bin length in seconds for the regular grid.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_seconds: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub test: TestOpts,
}

impl TestRunOpts {
    pub fn fill_defaults(&mut self) {
        self.tape.fill_defaults();
        self.test.fill_defaults();
        fill!(self.process => PathKind::Inventory, self.bin_seconds => 300.0);
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOpts {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: TestRunOpts,
    /// Comma-separated σ′ values.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_grid: Option<Vec<f64>>,
    /// Comma-separated γ values.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<Vec<f64>>,
}

impl SweepOpts {
    pub fn fill_defaults(&mut self) {
        self.run.fill_defaults();
        fill!(
            self.sigma_grid => (1..=10).map(|k| k as f64 / 10.0).collect(),
            self.gamma_grid => (3..=10).map(f64::from).collect(),
        );
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchOpts {
    /// Day tape; repeat for several days. The day label is the file stem.
    #[arg(long = "day")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub days: Option<Vec<PathBuf>>,
    /// Comma-separated broker ids (table rows).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traders: Option<Vec<String>>,
    /// Comma-separated symbols (table columns).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<String>>,
    /// regular or async.
    #[arg(long, value_parser = kebab::<TestKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<TestKind>,
    #[arg(long, value_parser = kebab::<PathKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<PathKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_seconds: Option<f64>,
    /// Minimum average trades per minute for a trader-day to count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_rate: Option<f64>,
    #[arg(long, value_parser = kebab::<WealthConvention>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wealth_convention: Option<WealthConvention>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub session_length: Option<f64>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tape_format: Option<TapeFormat>,
    #[command(flatten)]
    #[serde(flatten)]
    pub test: TestOpts,
}

impl BatchOpts {
    pub fn fill_defaults(&mut self) {
        self.test.fill_defaults();
        fill!(
            self.mode => TestKind::Regular,
            self.process => PathKind::Inventory,
            self.bin_seconds => 300.0,
            self.min_rate => 1.0,
            self.wealth_convention => WealthConvention::PaymentSum,
            self.tape_format => TapeFormat::default(),
        );
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateOpts {
    #[command(flatten)]
    #[serde(flatten)]
    pub tape: TapeOpts,
    /// Prior-day tape for the price volatility; repeat for up to ten days.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<PathBuf>>,
    /// Average bid-ask spread per bin (the tape carries no quotes).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_spread: Option<f64>,
    /// Bin length in the unit of the impact formulas.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Bin length in seconds for the average bin volume.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_seconds: Option<f64>,
    /// Express both volatilities per √second.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_sqrt_second: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_penalty: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub running_penalty: Option<f64>,
}

impl EstimateOpts {
    pub fn fill_defaults(&mut self) {
        use brownexec_core::execmodel::{DEFAULT_RUNNING_PENALTY, DEFAULT_TERMINAL_PENALTY};
        self.tape.fill_defaults();
        fill!(
            self.history => Vec::new(),
            self.dt => 1.0,
            self.bin_seconds => 300.0,
            self.per_sqrt_second => false,
            self.terminal_penalty => DEFAULT_TERMINAL_PENALTY,
            self.running_penalty => DEFAULT_RUNNING_PENALTY,
        );
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateOpts {
    /// TradeGrid CSV (`time,price,inventory,wealth`), e.g. from `paths`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<PathBuf>,
    /// ExecutionParams JSON, e.g. from `estimate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    /// 1 (observed prices) or 2 (simulated prices).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approach: Option<u8>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nsim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Lower percentile of the bands.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_lo: Option<f64>,
    /// Upper percentile of the bands.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_hi: Option<f64>,
    /// Scenarios written to the sample CSVs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_perm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_temp: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_price: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_inv: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal_penalty: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub running_penalty: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
}

impl SimulateOpts {
    pub fn fill_defaults(&mut self) {
        let (lo, hi) = brownexec_core::execmodel::DEFAULT_BAND;
        fill!(
            self.approach => 1,
            self.nsim => 10_000,
            self.seed => 0,
            self.band_lo => lo,
            self.band_hi => hi,
            self.samples => 5,
        );
    }
}
