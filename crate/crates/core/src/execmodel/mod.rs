//! Optimal execution with noisy inventory, and Monte Carlo replays of it
//! along a real trader's day.

mod params;
mod riccati;
mod simulate;
mod stats;

pub use params::{ExecutionParams, DEFAULT_RUNNING_PENALTY, DEFAULT_TERMINAL_PENALTY};
pub use riccati::{
    eta_closed_form, eta_fn, optimal_rate, riccati_residual, riccati_rhs, v_fn, EtaBranch, EtaCurve,
};
pub use simulate::{
    simulate, simulate_approach1, simulate_approach2, write_scenarios_csv, Approach, Ensemble, PathMatrix,
    TradeGrid, STABLE_STEP_GAIN,
};
pub use stats::{
    ensemble_stats, gaussian_kde, trapezoid, write_band_csv, write_kde_csv, Band, EnsembleSummary, Kde,
    DEFAULT_BAND,
};
