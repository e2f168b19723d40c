//! Percentile bands, terminal-wealth summary and kernel density.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::riccati::EtaBranch;
use super::simulate::{Ensemble, PathMatrix, TradeGrid};
use crate::error::{Error, Result};

pub const DEFAULT_BAND: (f64, f64) = (5.0, 95.0);
const KDE_POINTS: usize = 512;
const KDE_REACH: f64 = 4.0;

/// Linear-interpolation percentile (R type 7) of sorted data, `pct ∈ [0, 100]`.
fn percentile_sorted(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * pct / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Lower band, median and upper band at every grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: Vec<f64>,
    pub median: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Band {
    fn of(m: &PathMatrix, lo: f64, hi: f64) -> Self {
        let mut band = Band {
            lo: Vec::with_capacity(m.cols()),
            median: Vec::with_capacity(m.cols()),
            hi: Vec::with_capacity(m.cols()),
        };
        for i in 0..m.cols() {
            let col = sorted(m.column(i));
            band.lo.push(percentile_sorted(&col, lo));
            band.median.push(percentile_sorted(&col, 50.0));
            band.hi.push(percentile_sorted(&col, hi));
        }
        band
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// Gaussian-kernel density with Silverman's bandwidth
/// `0.9 · min(sd, IQR/1.34) · n^{−1/5}`, on 512 points spanning the data ± 4h.
pub fn gaussian_kde(data: &[f64]) -> Result<Kde> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = data.len() as f64;
    let s = sorted(data.to_vec());
    let mean = s.iter().sum::<f64>() / n;
    let sd = if s.len() > 1 {
        (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let iqr = percentile_sorted(&s, 75.0) - percentile_sorted(&s, 25.0);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        // All points coincide: use a kernel narrow relative to the value.
        (false, false) => (mean.abs() * 1e-6).max(1e-9),
    };
    let h = 0.9 * spread * n.powf(-0.2);

    let (lo, hi) = (s[0] - KDE_REACH * h, s[s.len() - 1] + KDE_REACH * h);
    let step = (hi - lo) / (KDE_POINTS - 1) as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..KDE_POINTS).map(|k| lo + k as f64 * step).collect();
    let density = grid
        .iter()
        .map(|&x| norm * s.iter().map(|&xi| (-0.5 * ((x - xi) / h).powi(2)).exp()).sum::<f64>())
        .collect();
    Ok(Kde {
        bandwidth: h,
        grid,
        density,
    })
}

/// Trapezoid-rule integral of a density on its grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub band_lo: f64,
    pub band_hi: f64,
    pub times: Vec<f64>,
    pub inventory: Band,
    pub wealth: Band,
    pub actual_inventory: Vec<f64>,
    pub actual_wealth: Vec<f64>,
    /// Mean of the simulated terminal wealths.
    pub mean_terminal_wealth: f64,
    /// Percentage of scenarios ending strictly above the actual terminal wealth.
    pub outperformance_pct: f64,
    pub kde: Kde,
    pub eta_branch: EtaBranch,
    pub negative_price_scenarios: usize,
}

pub fn ensemble_stats(e: &Ensemble, actual: &TradeGrid, lo: f64, hi: f64) -> Result<EnsembleSummary> {
    if !(0.0..100.0).contains(&lo) || !(lo < hi && hi <= 100.0) {
        return Err(Error::invalid("band", "need 0 ≤ lo < hi ≤ 100"));
    }
    if actual.times() != e.times.as_slice() {
        return Err(Error::invalid("grid", "ensemble and actual grid differ"));
    }
    let last = e.times.len() - 1;
    let terminal = e.wealth.column(last);
    let actual_terminal = actual.actual_wealth()[last];
    let mean_terminal_wealth = terminal.iter().sum::<f64>() / terminal.len() as f64;
    let beats = terminal.iter().filter(|x| **x > actual_terminal).count();
    Ok(EnsembleSummary {
        band_lo: lo,
        band_hi: hi,
        times: e.times.clone(),
        inventory: Band::of(&e.inventory, lo, hi),
        wealth: Band::of(&e.wealth, lo, hi),
        actual_inventory: actual.actual_inventory().to_vec(),
        actual_wealth: actual.actual_wealth().to_vec(),
        mean_terminal_wealth,
        outperformance_pct: 100.0 * beats as f64 / e.n_sim as f64,
        kde: gaussian_kde(&terminal)?,
        eta_branch: e.eta_branch,
        negative_price_scenarios: e.negative_price_scenarios,
    })
}

/// `time,lo,hi,actual` CSV of one band.
pub fn write_band_csv<W: Write>(times: &[f64], band: &Band, actual: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "lo", "hi", "actual"])?;
    for i in 0..times.len() {
        w.write_record([
            times[i].to_string(),
            band.lo[i].to_string(),
            band.hi[i].to_string(),
            actual[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `x,density` CSV.
pub fn write_kde_csv<W: Write>(kde: &Kde, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "density"])?;
    for (x, d) in kde.grid.iter().zip(&kde.density) {
        w.write_record([x.to_string(), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::execmodel::{simulate_approach1, simulate_approach2, ExecutionParams};

    fn grid(n: usize) -> TradeGrid {
        let t = (0..n).map(|i| i as f64).collect();
        TradeGrid::new(t, vec![50.0; n], vec![0.0; n], vec![0.0; n]).unwrap()
    }

    fn noisy() -> ExecutionParams {
        ExecutionParams {
            alpha_perm: 0.0,
            kappa_temp: 10.0,
            running_penalty: 0.01,
            terminal_penalty: 5.0,
            sigma_inv: 20.0,
            sigma_price: 0.1,
            horizon: 100.0,
            q0: 1000.0,
            ..Default::default()
        }
    }

    #[test]
    fn percentile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 100.0), 4.0);
        assert_eq!(percentile_sorted(&v, 50.0), 2.5);
        assert!((percentile_sorted(&v, 25.0) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn single_scenario_collapses_bands() {
        let g = grid(20);
        let e = simulate_approach2(&g, &noisy(), 1, 4).unwrap();
        let s = ensemble_stats(&e, &g, 5.0, 95.0).unwrap();
        assert_eq!(s.wealth.lo, e.wealth.row(0));
        assert_eq!(s.wealth.hi, e.wealth.row(0));
        assert!(s.outperformance_pct == 0.0 || s.outperformance_pct == 100.0);
    }

    #[test]
    fn ties_do_not_count_as_outperformance() {
        let g = grid(10);
        let p = ExecutionParams {
            q0: 0.0,
            sigma_inv: 0.0,
            ..noisy()
        };
        let e = simulate_approach1(&g, &p, 7, 0).unwrap();
        let s = ensemble_stats(&e, &g, 5.0, 95.0).unwrap();
        assert_eq!(s.outperformance_pct, 0.0);
        assert!((trapezoid(&s.kde.grid, &s.kde.density) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bands_are_ordered_and_density_normalised() {
        let g = grid(60);
        let e = simulate_approach2(&g, &noisy(), 500, 11).unwrap();
        let s = ensemble_stats(&e, &g, 5.0, 90.0).unwrap();
        for b in [&s.inventory, &s.wealth] {
            for i in 0..g.len() {
                assert!(b.lo[i] <= b.median[i] && b.median[i] <= b.hi[i]);
            }
        }
        assert!((trapezoid(&s.kde.grid, &s.kde.density) - 1.0).abs() < 1e-3);
        assert!((0.0..=100.0).contains(&s.outperformance_pct));
    }

    #[test]
    fn invalid_band() {
        let g = grid(5);
        let e = simulate_approach1(&g, &noisy(), 2, 0).unwrap();
        assert!(ensemble_stats(&e, &g, 95.0, 5.0).is_err());
        assert!(ensemble_stats(&e, &g, 5.0, 101.0).is_err());
    }

    #[test]
    fn csv_writers() {
        let kde = gaussian_kde(&[0.0, 1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_kde_csv(&kde, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,density\n"));
        assert_eq!(text.lines().count(), KDE_POINTS + 1);

        let band = Band {
            lo: vec![0.0],
            median: vec![1.0],
            hi: vec![2.0],
        };
        let mut buf = Vec::new();
        write_band_csv(&[0.5], &band, &[1.5], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,lo,hi,actual\n0.5,0,2,1.5\n");
    }
}
