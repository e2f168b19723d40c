use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context};
use brownexec_core::btest::{
    async_test, regular_test, sensitivity_sweep, write_sweep_csv, BatchAccumulator, BatchConfig, DayTape,
};
use brownexec_core::estimation::{
    average_bin_volume, estimate_impacts, estimate_inventory_vol, estimate_price_vol, intraday_price_std,
    per_sqrt_second, EstimationInputs,
};
use brownexec_core::execmodel::{
    ensemble_stats, simulate, write_band_csv, write_kde_csv, write_scenarios_csv, Approach, ExecutionParams,
    TradeGrid,
};
use brownexec_core::marketdata::{
    async_increments, build_trader_paths, filter_symbol, parse_tape, resample_regular, PathKind, PathSeries,
    TapeFormat, TradeRecord, TraderPathConfig,
};
use serde::Serialize;

use crate::manifest::Run;
use crate::opts::{BatchOpts, EstimateOpts, PathsOpts, SimulateOpts, SweepOpts, TapeOpts, TestRunOpts};

fn load_tape(run: &mut Run, path: &Path, format: &TapeFormat, symbol: Option<&str>) -> anyhow::Result<Vec<TradeRecord>> {
    run.input(path);
    let file = File::open(path).with_context(|| format!("opening tape {}", path.display()))?;
    let records = parse_tape(BufReader::new(file), format).with_context(|| format!("parsing tape {}", path.display()))?;
    Ok(match symbol {
        Some(s) => filter_symbol(&records, s),
        None => records,
    })
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> anyhow::Result<&'a T> {
    v.as_ref().with_context(|| format!("missing required option --{flag}"))
}

fn trader_tape(run: &mut Run, t: &TapeOpts) -> anyhow::Result<(Vec<TradeRecord>, String)> {
    let path = required(&t.tape, "tape")?;
    let trader = required(&t.trader, "trader")?.clone();
    let format = t.tape_format.clone().unwrap_or_default();
    Ok((load_tape(run, path, &format, t.symbol.as_deref())?, trader))
}

pub fn paths(run: &mut Run, o: &PathsOpts) -> anyhow::Result<()> {
    let (records, trader) = trader_tape(run, &o.tape)?;
    let (inv, wealth) = build_trader_paths(&records, &trader, &o.tape.path_config())?;
    inv.write_csv(run.create("inventory.csv")?)?;
    wealth.write_csv(run.create("wealth.csv")?)?;
    let grid = TradeGrid::from_tape(&records, &trader, o.tape.initial_inventory.unwrap_or(0.0))?;
    grid.write_csv(run.create("grid.csv")?)?;
    Ok(())
}

fn test_path(run: &mut Run, o: &TestRunOpts) -> anyhow::Result<PathSeries> {
    let kind = o.process.unwrap_or(PathKind::Inventory);
    if let Some(input) = &o.input {
        run.input(input);
        let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        let session = match o.tape.session_length {
            Some(t) => t,
            None => {
                let probe = PathSeries::read_csv(text.as_bytes(), kind, f64::MAX, 0.0)?;
                probe.times().last().copied().filter(|t| *t > 0.0).unwrap_or(1.0)
            }
        };
        let initial = o.tape.initial_inventory.unwrap_or(0.0);
        return Ok(PathSeries::read_csv(text.as_bytes(), kind, session, initial)?);
    }
    let (records, trader) = trader_tape(run, &o.tape)?;
    let (inv, wealth) = build_trader_paths(&records, &trader, &o.tape.path_config())?;
    Ok(match kind {
        PathKind::Inventory => inv,
        PathKind::Wealth => wealth,
    })
}

pub fn test_regular(run: &mut Run, o: &TestRunOpts) -> anyhow::Result<()> {
    let path = test_path(run, o)?;
    let incs = resample_regular(&path, o.bin_seconds.unwrap_or(300.0))?;
    let result = regular_test(&incs, &o.test.config())?;
    run.write_json("result.json", &result)
}

pub fn test_async(run: &mut Run, o: &TestRunOpts) -> anyhow::Result<()> {
    let path = test_path(run, o)?;
    let result = async_test(&async_increments(&path)?, &o.test.config())?;
    run.write_json("result.json", &result)
}

pub fn sweep(run: &mut Run, o: &SweepOpts) -> anyhow::Result<()> {
    let path = test_path(run, &o.run)?;
    let incs = resample_regular(&path, o.run.bin_seconds.unwrap_or(300.0))?;
    let points = sensitivity_sweep(
        &incs,
        required(&o.sigma_grid, "sigma-grid")?,
        required(&o.gamma_grid, "gamma-grid")?,
        &o.run.test.config(),
    )?;
    write_sweep_csv(&points, run.create("sweep.csv")?)?;
    Ok(())
}

fn write_batch(run: &mut Run, acc: &BatchAccumulator) -> anyhow::Result<()> {
    acc.report().write_table_csv(run.create("table.csv")?)?;
    acc.report().write_cells_csv(run.create("cells.csv")?)?;
    Ok(())
}

/// The inner error reports a day that failed after earlier days were
/// already tabulated; those are written before it is returned.
pub fn batch(run: &mut Run, o: &BatchOpts) -> anyhow::Result<Result<(), anyhow::Error>> {
    let days = required(&o.days, "day")?.clone();
    let traders = required(&o.traders, "traders")?.clone();
    let symbols = required(&o.symbols, "symbols")?.clone();
    if days.is_empty() || traders.is_empty() || symbols.is_empty() {
        bail!("batch needs at least one day, trader and symbol");
    }
    let cfg = BatchConfig {
        test: o.test.config(),
        mode: o.mode.unwrap_or(brownexec_core::TestKind::Regular),
        process: o.process.unwrap_or(PathKind::Inventory),
        bin_seconds: o.bin_seconds.unwrap_or(300.0),
        min_rate: o.min_rate.unwrap_or(1.0),
        paths: TraderPathConfig {
            wealth_convention: o.wealth_convention.unwrap_or_default(),
            initial_inventory: 0.0,
            session_length: o.session_length,
        },
    };
    cfg.test.validate()?;
    let format = o.tape_format.clone().unwrap_or_default();
    let mut acc = BatchAccumulator::new(&traders, &symbols);
    for path in &days {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let step = load_tape(run, path, &format, None).and_then(|records| {
            acc.add_day(&DayTape { day: label, records }, &cfg)
                .with_context(|| format!("day {}", path.display()))
        });
        if let Err(e) = step {
            write_batch(run, &acc)?;
            return Ok(Err(e));
        }
    }
    write_batch(run, &acc)?;
    Ok(Ok(()))
}

#[derive(Serialize)]
struct EstimateReport {
    alpha_hat: f64,
    kappa_hat: f64,
    avg_bin_spread: f64,
    avg_bin_volume: f64,
    dt: f64,
    sigma_price: f64,
    price_vol_days: usize,
    short_history: bool,
    sigma_inv: f64,
    sigma_inv_raw: f64,
    per_sqrt_second: bool,
    horizon: f64,
    q0: f64,
}

pub fn estimate(run: &mut Run, o: &EstimateOpts) -> anyhow::Result<()> {
    let (records, trader) = trader_tape(run, &o.tape)?;
    let format = o.tape.tape_format.clone().unwrap_or_default();
    let grid = TradeGrid::from_tape(&records, &trader, o.tape.initial_inventory.unwrap_or(0.0))?;
    let session = o
        .tape
        .session_length
        .or_else(|| records.last().map(|r| r.timestamp))
        .filter(|t| *t > 0.0)
        .unwrap_or(1.0);
    let per_second = o.per_sqrt_second.unwrap_or(false);

    let history = o.history.clone().unwrap_or_default();
    let mut stds = Vec::new();
    if history.is_empty() {
        log::warn!("no --history tapes; price volatility taken from the estimation day itself");
        stds.push(intraday_price_std(&records, per_second)?);
    }
    for path in &history {
        let day = load_tape(run, path, &format, o.tape.symbol.as_deref())?;
        stds.push(intraday_price_std(&day, per_second)?);
    }

    let inputs = EstimationInputs {
        avg_bin_spread: *required(&o.avg_spread, "avg-spread")?,
        avg_bin_volume: average_bin_volume(&records, o.bin_seconds.unwrap_or(300.0), session)?,
        dt: o.dt.unwrap_or(1.0),
        intraday_stds: stds,
        inventory_increments: grid.actual_inventory().windows(2).map(|w| w[1] - w[0]).collect(),
    };
    let (alpha_hat, kappa_hat) = estimate_impacts(&inputs)?;
    let price_vol = estimate_price_vol(&inputs.intraday_stds)?;
    let sigma_inv_raw = estimate_inventory_vol(&inputs.inventory_increments)?;
    let sigma_inv = if per_second {
        let t = grid.times();
        per_sqrt_second(sigma_inv_raw, (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64)?
    } else {
        sigma_inv_raw
    };

    let params = ExecutionParams {
        alpha_perm: alpha_hat,
        kappa_temp: kappa_hat,
        sigma_price: price_vol.sigma,
        sigma_inv,
        terminal_penalty: o.terminal_penalty.unwrap_or(brownexec_core::execmodel::DEFAULT_TERMINAL_PENALTY),
        running_penalty: o.running_penalty.unwrap_or(brownexec_core::execmodel::DEFAULT_RUNNING_PENALTY),
        horizon: session,
        q0: grid.actual_inventory()[0],
        q_target: 0.0,
    };
    run.write_json("params.json", &params)?;
    run.write_json(
        "estimate.json",
        &EstimateReport {
            alpha_hat,
            kappa_hat,
            avg_bin_spread: inputs.avg_bin_spread,
            avg_bin_volume: inputs.avg_bin_volume,
            dt: inputs.dt,
            sigma_price: price_vol.sigma,
            price_vol_days: price_vol.days_used,
            short_history: price_vol.short_history,
            sigma_inv,
            sigma_inv_raw,
            per_sqrt_second: per_second,
            horizon: session,
            q0: params.q0,
        },
    )
}

#[derive(Serialize)]
struct SimulationSummary {
    approach: u8,
    n_sim: usize,
    seed: u64,
    band_lo: f64,
    band_hi: f64,
    grid_points: usize,
    mean_terminal_wealth: f64,
    actual_terminal_wealth: f64,
    outperformance_pct: f64,
    eta_branch: brownexec_core::execmodel::EtaBranch,
    negative_price_scenarios: usize,
    max_step_gain: f64,
    kde_bandwidth: f64,
    params: ExecutionParams,
}

fn simulation_params(run: &mut Run, o: &SimulateOpts) -> anyhow::Result<ExecutionParams> {
    let mut p = match &o.params {
        Some(path) => {
            run.input(path);
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExecutionParams::default(),
    };
    let overrides = [
        (&mut p.alpha_perm, o.alpha_perm),
        (&mut p.kappa_temp, o.kappa_temp),
        (&mut p.sigma_price, o.sigma_price),
        (&mut p.sigma_inv, o.sigma_inv),
        (&mut p.terminal_penalty, o.terminal_penalty),
        (&mut p.running_penalty, o.running_penalty),
        (&mut p.horizon, o.horizon),
        (&mut p.q0, o.q0),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    p.validate()?;
    Ok(p)
}

pub fn simulate_cmd(run: &mut Run, o: &SimulateOpts) -> anyhow::Result<()> {
    let grid_path = required(&o.grid, "grid")?;
    run.input(grid_path);
    let file = File::open(grid_path).with_context(|| format!("opening {}", grid_path.display()))?;
    let grid = TradeGrid::read_csv(BufReader::new(file))?;
    let p = simulation_params(run, o)?;
    let approach = match o.approach.unwrap_or(1) {
        1 => Approach::ObservedPrices,
        _ => Approach::SimulatedPrices,
    };
    let (n_sim, seed) = (o.nsim.unwrap_or(10_000), o.seed.unwrap_or(0));
    let (lo, hi) = (o.band_lo.unwrap_or(5.0), o.band_hi.unwrap_or(95.0));
    let samples = o.samples.unwrap_or(5);

    let ensemble = simulate(approach, &grid, &p, n_sim, seed)?;
    let stats = ensemble_stats(&ensemble, &grid, lo, hi)?;
    write_band_csv(&stats.times, &stats.inventory, &stats.actual_inventory, run.create("inventory_band.csv")?)?;
    write_band_csv(&stats.times, &stats.wealth, &stats.actual_wealth, run.create("wealth_band.csv")?)?;
    write_scenarios_csv(&ensemble.times, &ensemble.inventory, samples, run.create("inventory_scenarios.csv")?)?;
    write_scenarios_csv(&ensemble.times, &ensemble.wealth, samples, run.create("wealth_scenarios.csv")?)?;
    if let Some(prices) = &ensemble.prices {
        write_scenarios_csv(&ensemble.times, prices, samples, run.create("price_scenarios.csv")?)?;
    }
    write_kde_csv(&stats.kde, run.create("kde.csv")?)?;
    run.write_json(
        "summary.json",
        &SimulationSummary {
            approach: approach.number(),
            n_sim,
            seed,
            band_lo: lo,
            band_hi: hi,
            grid_points: grid.len(),
            mean_terminal_wealth: stats.mean_terminal_wealth,
            actual_terminal_wealth: grid.actual_wealth()[grid.len() - 1],
            outperformance_pct: stats.outperformance_pct,
            eta_branch: stats.eta_branch,
            negative_price_scenarios: stats.negative_price_scenarios,
            max_step_gain: ensemble.max_step_gain,
            kde_bandwidth: stats.kde.bandwidth,
            params: p,
        },
    )
}
