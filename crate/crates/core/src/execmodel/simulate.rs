//! Euler–Maruyama Monte Carlo of the optimal strategy along a trader's day.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ExecutionParams;
use super::riccati::{EtaBranch, EtaCurve};
use crate::error::{Error, Result};
use crate::marketdata::{trader_observations, TradeRecord};
use crate::rng::scenario_rng;

/// Stream ids inside a scenario's ChaCha key.
const INVENTORY_STREAM: u64 = 0;
const PRICE_STREAM: u64 = 1;

/// The times a trader traded, with the tape's prices and the trader's
/// actual inventory and cash.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeGrid {
    times: Vec<f64>,
    prices: Vec<f64>,
    actual_inventory: Vec<f64>,
    actual_wealth: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridRow {
    time: f64,
    price: f64,
    inventory: f64,
    wealth: f64,
}

impl TradeGrid {
    pub fn new(
        times: Vec<f64>,
        prices: Vec<f64>,
        actual_inventory: Vec<f64>,
        actual_wealth: Vec<f64>,
    ) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::EmptyPath);
        }
        if prices.len() != n || actual_inventory.len() != n || actual_wealth.len() != n {
            return Err(Error::invalid("grid", "times, prices, inventory and wealth must have equal length"));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("times", "must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("times", "must be strictly increasing"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&prices) || !finite(&actual_inventory) || !finite(&actual_wealth) {
            return Err(Error::invalid("grid", "values must be finite"));
        }
        Ok(Self {
            times,
            prices,
            actual_inventory,
            actual_wealth,
        })
    }

    /// Grid of `trader`'s trade times. Wealth is the trader's cash account,
    /// `−Σ signed size · price`, the same quantity the simulations track.
    pub fn from_tape(records: &[TradeRecord], trader: &str, initial_inventory: f64) -> Result<Self> {
        let obs = trader_observations(records, trader)?;
        let mut q = initial_inventory;
        let mut cash = 0.0;
        let mut inventory = Vec::with_capacity(obs.len());
        let mut wealth = Vec::with_capacity(obs.len());
        for o in &obs {
            q += o.signed_size;
            cash -= o.payment;
            inventory.push(q);
            wealth.push(cash);
        }
        Self::new(
            obs.iter().map(|o| o.time).collect(),
            obs.iter().map(|o| o.price).collect(),
            inventory,
            wealth,
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn actual_inventory(&self) -> &[f64] {
        &self.actual_inventory
    }

    pub fn actual_wealth(&self) -> &[f64] {
        &self.actual_wealth
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Insert the midpoint of every interval, with linearly interpolated values.
    pub fn refined(&self) -> Self {
        let mid = |v: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(2 * v.len() - 1);
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(v[v.len() - 1]);
            out
        };
        Self {
            times: mid(&self.times),
            prices: mid(&self.prices),
            actual_inventory: mid(&self.actual_inventory),
            actual_wealth: mid(&self.actual_wealth),
        }
    }

    /// `time,price,inventory,wealth` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.len() {
            w.serialize(GridRow {
                time: self.times[i],
                price: self.prices[i],
                inventory: self.actual_inventory[i],
                wealth: self.actual_wealth[i],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let (mut t, mut s, mut q, mut x) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for row in r.deserialize() {
            let row: GridRow = row?;
            t.push(row.time);
            s.push(row.price);
            q.push(row.inventory);
            x.push(row.wealth);
        }
        Self::new(t, s, q, x)
    }
}

/// Row-major `rows × cols` matrix; one row per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PathMatrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.data[j * self.cols + i]
    }

    /// Values of all scenarios at grid index `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.rows).map(|j| self.get(j, i)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Approach {
    /// Observed trade prices, no temporary-impact cost in wealth.
    #[serde(rename = "1")]
    ObservedPrices,
    /// Simulated impacted prices, wealth pays `s + κν`.
    #[serde(rename = "2")]
    SimulatedPrices,
}

impl Approach {
    pub fn number(self) -> u8 {
        match self {
            Approach::ObservedPrices => 1,
            Approach::SimulatedPrices => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub approach: Approach,
    pub n_sim: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub inventory: PathMatrix,
    pub wealth: PathMatrix,
    /// Simulated prices, present for the simulated-price scheme only.
    pub prices: Option<PathMatrix>,
    pub eta_branch: EtaBranch,
    /// Scenarios in which some simulated price was ≤ 0. They are kept as is.
    pub negative_price_scenarios: usize,
    /// `max_i |α − η_{τ_{i−1}}| / (2κ) · Δτ_i`. Above 2 the explicit scheme
    /// amplifies inventory instead of damping it.
    pub max_step_gain: f64,
}

/// Above this the Euler recursion for q is unstable.
pub const STABLE_STEP_GAIN: f64 = 2.0;

struct Prepared {
    curve: EtaCurve,
    eta: Vec<f64>,
    max_step_gain: f64,
}

fn prepare(grid: &TradeGrid, p: &ExecutionParams, n_sim: usize) -> Result<Prepared> {
    if n_sim == 0 {
        return Err(Error::invalid("n_sim", "must be at least 1"));
    }
    if grid.times[grid.len() - 1] > p.horizon {
        return Err(Error::invalid("times", format!("grid extends past the horizon {}", p.horizon)));
    }
    let curve = EtaCurve::new(p)?;
    let eta: Vec<f64> = grid.times.iter().map(|&t| curve.eta(t)).collect();
    let max_step_gain = grid
        .times
        .windows(2)
        .zip(&eta)
        .map(|(w, e)| (p.alpha_perm - e).abs() / (2.0 * p.kappa_temp) * (w[1] - w[0]))
        .fold(0.0, f64::max);
    if max_step_gain > STABLE_STEP_GAIN {
        log::warn!("Euler step gain {max_step_gain:.3e} exceeds {STABLE_STEP_GAIN}: inventory paths will oscillate and diverge on this grid");
    }
    Ok(Prepared {
        curve,
        eta,
        max_step_gain,
    })
}

/// Scheme #1: trade at the tape's prices.
///
/// ```text
/// q_i = q_{i−1} + ν Δτ + σ̃ √Δτ ε̃
/// x_i = x_{i−1} − ν s_{i−1} Δτ − σ̃ s_{i−1} √Δτ ε̃
/// ```
///
/// with `ν = ν̂(τ_{i−1}, q_{i−1})`, `q_0 = p.q0`, `x_0 = 0`.
pub fn simulate_approach1(grid: &TradeGrid, p: &ExecutionParams, n_sim: usize, seed: u64) -> Result<Ensemble> {
    let Prepared {
        curve,
        eta,
        max_step_gain,
    } = prepare(grid, p, n_sim)?;
    let n = grid.len();
    let mut inventory = PathMatrix::zeros(n_sim, n);
    let mut wealth = PathMatrix::zeros(n_sim, n);
    let (alpha, two_kappa, sig) = (p.alpha_perm, 2.0 * p.kappa_temp, p.sigma_inv);
    let (t, s) = (&grid.times, &grid.prices);

    inventory
        .data
        .par_chunks_mut(n)
        .zip(wealth.data.par_chunks_mut(n))
        .enumerate()
        .for_each(|(j, (qs, xs))| {
            let mut rng = scenario_rng(seed, j as u64, INVENTORY_STREAM);
            let (mut q, mut x) = (p.q0, 0.0);
            qs[0] = q;
            xs[0] = x;
            for i in 1..n {
                let dt = t[i] - t[i - 1];
                let nu = (alpha - eta[i - 1]) / two_kappa * q;
                let noise = sig * dt.sqrt() * rng.sample::<f64, _>(StandardNormal);
                q += nu * dt + noise;
                x -= nu * s[i - 1] * dt + s[i - 1] * noise;
                qs[i] = q;
                xs[i] = x;
            }
        });

    Ok(Ensemble {
        approach: Approach::ObservedPrices,
        n_sim,
        seed,
        times: grid.times.clone(),
        inventory,
        wealth,
        prices: None,
        eta_branch: curve.branch(),
        negative_price_scenarios: 0,
        max_step_gain,
    })
}

/// Scheme #2: simulate the impacted price alongside inventory and wealth.
///
/// ```text
/// s_i = s_{i−1} + α ν Δτ + σ √Δτ ε
/// q_i = q_{i−1} + ν Δτ + σ̃ √Δτ ε̃
/// x_i = x_{i−1} − ν (s_{i−1} + κν) Δτ − σ̃ (s_{i−1} + κν) √Δτ ε̃
/// ```
///
/// `ε` and `ε̃` come from independent streams; `s_0` is the first tape price.
pub fn simulate_approach2(grid: &TradeGrid, p: &ExecutionParams, n_sim: usize, seed: u64) -> Result<Ensemble> {
    let Prepared {
        curve,
        eta,
        max_step_gain,
    } = prepare(grid, p, n_sim)?;
    let n = grid.len();
    let mut inventory = PathMatrix::zeros(n_sim, n);
    let mut wealth = PathMatrix::zeros(n_sim, n);
    let mut prices = PathMatrix::zeros(n_sim, n);
    let (alpha, kappa, sig_q, sig_s) = (p.alpha_perm, p.kappa_temp, p.sigma_inv, p.sigma_price);
    let t = &grid.times;
    let s0 = grid.prices[0];

    let negative: usize = inventory
        .data
        .par_chunks_mut(n)
        .zip(wealth.data.par_chunks_mut(n))
        .zip(prices.data.par_chunks_mut(n))
        .enumerate()
        .map(|(j, ((qs, xs), ss))| {
            let mut inv_rng = scenario_rng(seed, j as u64, INVENTORY_STREAM);
            let mut price_rng = scenario_rng(seed, j as u64, PRICE_STREAM);
            let (mut q, mut x, mut s) = (p.q0, 0.0, s0);
            let mut crossed = s <= 0.0;
            qs[0] = q;
            xs[0] = x;
            ss[0] = s;
            for i in 1..n {
                let dt = t[i] - t[i - 1];
                let sq = dt.sqrt();
                let nu = (alpha - eta[i - 1]) / (2.0 * kappa) * q;
                let inv_noise = sig_q * sq * inv_rng.sample::<f64, _>(StandardNormal);
                let price_noise = sig_s * sq * price_rng.sample::<f64, _>(StandardNormal);
                let exec = s + kappa * nu;
                x -= nu * exec * dt + exec * inv_noise;
                q += nu * dt + inv_noise;
                s += alpha * nu * dt + price_noise;
                crossed |= s <= 0.0;
                qs[i] = q;
                xs[i] = x;
                ss[i] = s;
            }
            usize::from(crossed)
        })
        .sum();

    if negative > 0 {
        log::warn!("{negative} of {n_sim} scenarios reached a non-positive simulated price");
    }
    Ok(Ensemble {
        approach: Approach::SimulatedPrices,
        n_sim,
        seed,
        times: grid.times.clone(),
        inventory,
        wealth,
        prices: Some(prices),
        eta_branch: curve.branch(),
        negative_price_scenarios: negative,
        max_step_gain,
    })
}

pub fn simulate(
    approach: Approach,
    grid: &TradeGrid,
    p: &ExecutionParams,
    n_sim: usize,
    seed: u64,
) -> Result<Ensemble> {
    match approach {
        Approach::ObservedPrices => simulate_approach1(grid, p, n_sim, seed),
        Approach::SimulatedPrices => simulate_approach2(grid, p, n_sim, seed),
    }
}

/// `time,path_0,…,path_{k−1}` for the first `k` scenarios of `m`.
pub fn write_scenarios_csv<W: Write>(times: &[f64], m: &PathMatrix, k: usize, out: W) -> Result<()> {
    let k = k.min(m.rows());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend((0..k).map(|j| format!("path_{j}")));
    w.write_record(&header)?;
    for (i, t) in times.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend((0..k).map(|j| m.get(j, i).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_grid(n: usize, dt: f64, price: f64) -> TradeGrid {
        let times = (0..n).map(|i| i as f64 * dt).collect();
        TradeGrid::new(times, vec![price; n], vec![0.0; n], vec![0.0; n]).unwrap()
    }

    fn liquidation_params() -> ExecutionParams {
        ExecutionParams {
            alpha_perm: 0.0,
            kappa_temp: 1.0e3,
            running_penalty: 10.0,
            terminal_penalty: 1.0e3,
            horizon: 100.0,
            q0: 1.0e4,
            ..Default::default()
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TradeGrid::new(vec![], vec![], vec![], vec![]).is_err());
        assert!(TradeGrid::new(vec![0.0, 0.0], vec![1.0; 2], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(TradeGrid::new(vec![0.0, 1.0], vec![1.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn grid_csv_round_trip() {
        let g = TradeGrid::new(vec![0.5, 1.25], vec![10.0, 10.5], vec![100.0, 0.0], vec![-1000.0, 50.0]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("time,price,inventory,wealth\n"));
        assert_eq!(TradeGrid::read_csv(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn grid_from_tape_tracks_cash() {
        let rec = |t: f64, price: f64, size: u64, b: &str, s: &str| TradeRecord {
            timestamp: t,
            symbol: "RY".into(),
            price,
            size,
            buyer_id: b.into(),
            seller_id: s.into(),
        };
        let tape = vec![rec(1.0, 10.0, 100, "7", "1"), rec(2.0, 11.0, 100, "1", "7")];
        let g = TradeGrid::from_tape(&tape, "7", 0.0).unwrap();
        assert_eq!(g.actual_inventory(), &[100.0, 0.0]);
        assert_eq!(g.actual_wealth(), &[-1000.0, 100.0]);
    }

    #[test]
    fn zero_inventory_is_a_fixed_point() {
        let p = ExecutionParams {
            q0: 0.0,
            horizon: 100.0,
            ..liquidation_params()
        };
        let e = simulate_approach1(&flat_grid(50, 1.0, 20.0), &p, 3, 1).unwrap();
        assert!(e.inventory.as_slice().iter().all(|v| *v == 0.0));
        assert!(e.wealth.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn no_inventory_noise_means_identical_scenarios() {
        let p = liquidation_params();
        let e = simulate_approach1(&flat_grid(1001, 0.1, 20.0), &p, 8, 5).unwrap();
        for j in 1..8 {
            assert_eq!(e.inventory.row(j), e.inventory.row(0));
            assert_eq!(e.wealth.row(j), e.wealth.row(0));
        }
        let q_t = *e.inventory.row(0).last().unwrap();
        assert!(q_t.abs() < 0.01 * p.q0, "terminal inventory {q_t}");
    }

    #[test]
    fn approach2_reduces_to_approach1_plus_spread_cost() {
        let p = ExecutionParams {
            running_penalty: 0.5,
            terminal_penalty: 2.0,
            ..liquidation_params()
        };
        let grid = flat_grid(41, 0.25, 20.0);
        let a1 = simulate_approach1(&grid, &p, 1, 0).unwrap();
        let a2 = simulate_approach2(&grid, &p, 1, 0).unwrap();
        assert_eq!(a1.inventory, a2.inventory);
        assert!(a2.prices.as_ref().unwrap().as_slice().iter().all(|s| *s == 20.0));
        let (q, t) = (a1.inventory.row(0), &grid.times);
        let mut spread = 0.0;
        for i in 1..grid.len() {
            let nu = EtaCurve::new(&p).unwrap().optimal_rate(t[i - 1], q[i - 1]);
            spread += p.kappa_temp * nu * nu * (t[i] - t[i - 1]);
            let expect = a1.wealth.get(0, i) - spread;
            assert!((a2.wealth.get(0, i) - expect).abs() <= 1e-9 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn price_noise_only_moves_prices() {
        let p = ExecutionParams {
            sigma_price: 0.05,
            ..liquidation_params()
        };
        let e = simulate_approach2(&flat_grid(30, 0.3, 20.0), &p, 4, 9).unwrap();
        assert_eq!(e.inventory.row(1), e.inventory.row(0));
        let prices = e.prices.unwrap();
        assert_ne!(prices.row(1), prices.row(0));
    }

    #[test]
    fn deterministic_given_seed() {
        let p = ExecutionParams {
            sigma_price: 0.05,
            sigma_inv: 30.0,
            ..liquidation_params()
        };
        let grid = flat_grid(60, 0.15, 20.0);
        let a = simulate_approach2(&grid, &p, 16, 77).unwrap();
        let b = simulate_approach2(&grid, &p, 16, 77).unwrap();
        assert_eq!(a, b);
        let c = simulate_approach2(&grid, &p, 16, 78).unwrap();
        assert_ne!(a.inventory, c.inventory);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let p = ExecutionParams {
            sigma_price: 0.05,
            sigma_inv: 30.0,
            ..liquidation_params()
        };
        let grid = flat_grid(60, 0.15, 20.0);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_approach2(&grid, &p, 64, 3).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn negative_prices_are_flagged() {
        let p = ExecutionParams {
            sigma_price: 50.0,
            ..liquidation_params()
        };
        let e = simulate_approach2(&flat_grid(100, 0.1, 1.0), &p, 20, 2).unwrap();
        assert!(e.negative_price_scenarios > 0);
    }

    #[test]
    fn grid_past_horizon_is_rejected() {
        let p = ExecutionParams {
            horizon: 1.0,
            ..liquidation_params()
        };
        assert!(simulate_approach1(&flat_grid(5, 1.0, 1.0), &p, 1, 0).is_err());
    }

    #[test]
    fn euler_error_halves_with_the_step() {
        // σ̃ = 0: dq/dt = ((α − η)/2κ) q, so q_T = q_0 exp(∫ (α − η)/2κ dt).
        let p = ExecutionParams {
            alpha_perm: 0.1,
            kappa_temp: 1.0,
            running_penalty: 0.5,
            terminal_penalty: 0.4,
            horizon: 2.0,
            q0: 100.0,
            ..Default::default()
        };
        let curve = EtaCurve::new(&p).unwrap();
        let m = 200_000;
        let h = p.horizon / m as f64;
        let rate = |t: f64| (p.alpha_perm - curve.eta(t)) / (2.0 * p.kappa_temp);
        let integral: f64 = (0..m)
            .map(|k| {
                let t = k as f64 * h;
                h / 6.0 * (rate(t) + 4.0 * rate(t + 0.5 * h) + rate(t + h))
            })
            .sum();
        let exact = p.q0 * integral.exp();

        let coarse = flat_grid(41, p.horizon / 40.0, 10.0);
        let fine = coarse.refined();
        let terminal = |g: &TradeGrid| *simulate_approach1(g, &p, 1, 0).unwrap().inventory.row(0).last().unwrap();
        let ratio = (terminal(&coarse) - exact).abs() / (terminal(&fine) - exact).abs();
        assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn scenario_csv_shape() {
        let e = simulate_approach1(&flat_grid(4, 1.0, 1.0), &liquidation_params(), 3, 0).unwrap();
        let mut buf = Vec::new();
        write_scenarios_csv(&e.times, &e.inventory, 5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,path_0,path_1,path_2\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
