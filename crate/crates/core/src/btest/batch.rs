//! Multi-day, multi-trader, multi-symbol rejection tables.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::test::{async_test, regular_test, RegularTestConfig, TestKind};
use crate::error::{Error, Result};
use crate::marketdata::{
    activity_filter, async_increments, build_trader_paths, filter_symbol, resample_regular, PathKind,
    TradeRecord, TraderPathConfig,
};
use crate::rng::cell_seed;

/// One trading day of tape.
#[derive(Debug, Clone)]
pub struct DayTape {
    pub day: String,
    pub records: Vec<TradeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub test: RegularTestConfig,
    pub mode: TestKind,
    pub process: PathKind,
    pub bin_seconds: f64,
    /// Minimum average trades per minute for a day to count.
    pub min_rate: f64,
    pub paths: TraderPathConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            test: RegularTestConfig::default(),
            mode: TestKind::Regular,
            process: PathKind::Inventory,
            bin_seconds: 300.0,
            min_rate: 1.0,
            paths: TraderPathConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub trader: String,
    pub symbol: String,
    pub included: usize,
    pub rejected: usize,
    /// Days that failed the activity filter (or had no trades).
    pub excluded: usize,
    /// Included days whose quarticity was zero (counted as non-rejections).
    pub degenerate: usize,
}

impl CellSummary {
    /// `100 · rejected / included`, or `None` when no day qualified.
    pub fn percentage(&self) -> Option<f64> {
        (self.included > 0).then(|| 100.0 * self.rejected as f64 / self.included as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub traders: Vec<String>,
    pub symbols: Vec<String>,
    /// Row-major `traders × symbols`.
    pub cells: Vec<CellSummary>,
    pub days: Vec<String>,
}

enum DayOutcome {
    Excluded,
    Tested { reject: bool, degenerate: bool },
}

/// Accumulates a report one day at a time, so a failure part-way through a
/// corpus still leaves the completed days available.
#[derive(Debug, Clone)]
pub struct BatchAccumulator {
    report: BatchReport,
}

impl BatchAccumulator {
    pub fn new(traders: &[String], symbols: &[String]) -> Self {
        let cells = traders
            .iter()
            .flat_map(|t| {
                symbols.iter().map(move |s| CellSummary {
                    trader: t.clone(),
                    symbol: s.clone(),
                    ..Default::default()
                })
            })
            .collect();
        Self {
            report: BatchReport {
                traders: traders.to_vec(),
                symbols: symbols.to_vec(),
                cells,
                days: Vec::new(),
            },
        }
    }

    pub fn add_day(&mut self, day: &DayTape, cfg: &BatchConfig) -> Result<()> {
        let session = cfg
            .paths
            .session_length
            .or_else(|| day.records.last().map(|r| r.timestamp))
            .filter(|t| *t > 0.0)
            .unwrap_or(1.0);
        let path_cfg = TraderPathConfig {
            session_length: Some(session),
            ..cfg.paths.clone()
        };
        let by_symbol: Vec<Vec<TradeRecord>> =
            self.report.symbols.iter().map(|s| filter_symbol(&day.records, s)).collect();
        let n_sym = self.report.symbols.len();

        let outcomes: Vec<Result<DayOutcome>> = self
            .report
            .cells
            .par_iter()
            .enumerate()
            .map(|(idx, cell)| {
                evaluate_cell(&by_symbol[idx % n_sym], cell, &day.day, &path_cfg, cfg)
            })
            .collect();

        // Validate the whole day before mutating, so a failed day leaves no trace.
        let outcomes: Vec<DayOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
        for (cell, outcome) in self.report.cells.iter_mut().zip(outcomes) {
            match outcome {
                DayOutcome::Excluded => cell.excluded += 1,
                DayOutcome::Tested { reject, degenerate } => {
                    cell.included += 1;
                    cell.rejected += usize::from(reject);
                    cell.degenerate += usize::from(degenerate);
                }
            }
        }
        self.report.days.push(day.day.clone());
        Ok(())
    }

    pub fn report(&self) -> &BatchReport {
        &self.report
    }

    pub fn into_report(self) -> BatchReport {
        self.report
    }
}

fn evaluate_cell(
    records: &[TradeRecord],
    cell: &CellSummary,
    day: &str,
    path_cfg: &TraderPathConfig,
    cfg: &BatchConfig,
) -> Result<DayOutcome> {
    let (inventory, wealth) = match build_trader_paths(records, &cell.trader, path_cfg) {
        Ok(p) => p,
        Err(Error::TraderNotFound(_)) => return Ok(DayOutcome::Excluded),
        Err(e) => return Err(e),
    };
    let path = match cfg.process {
        PathKind::Inventory => inventory,
        PathKind::Wealth => wealth,
    };
    if !activity_filter(&path, cfg.min_rate) {
        return Ok(DayOutcome::Excluded);
    }
    let test_cfg = RegularTestConfig {
        seed: cell_seed(cfg.test.seed, &[&cell.trader, &cell.symbol, day]),
        ..cfg.test.clone()
    };
    let result = match cfg.mode {
        TestKind::Regular => regular_test(&resample_regular(&path, cfg.bin_seconds)?, &test_cfg),
        TestKind::Async => match async_increments(&path) {
            Ok(incs) => async_test(&incs, &test_cfg),
            Err(Error::TooFewObservations { .. }) => return Ok(DayOutcome::Excluded),
            Err(e) => Err(e),
        },
    }?;
    Ok(DayOutcome::Tested {
        reject: result.reject_null,
        degenerate: result.degenerate,
    })
}

/// Run every day through the tests and tabulate rejection percentages.
pub fn batch_runner(
    days: &[DayTape],
    traders: &[String],
    symbols: &[String],
    cfg: &BatchConfig,
) -> Result<BatchReport> {
    cfg.test.validate()?;
    let mut acc = BatchAccumulator::new(traders, symbols);
    for day in days {
        acc.add_day(day, cfg)?;
    }
    Ok(acc.into_report())
}

impl BatchReport {
    pub fn cell(&self, trader: &str, symbol: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.trader == trader && c.symbol == symbol)
    }

    /// Traders as rows, symbols as columns; empty field where no day qualified.
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["trader".to_string()];
        header.extend(self.symbols.iter().cloned());
        w.write_record(&header)?;
        for (row, trader) in self.cells.chunks(self.symbols.len().max(1)).zip(&self.traders) {
            let mut rec = vec![trader.clone()];
            rec.extend(row.iter().map(|c| c.percentage().map(|p| p.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long format with the counts behind each percentage.
    pub fn write_cells_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trader", "symbol", "included", "rejected", "excluded", "degenerate", "percentage"])?;
        for c in &self.cells {
            w.write_record([
                c.trader.clone(),
                c.symbol.clone(),
                c.included.to_string(),
                c.rejected.to_string(),
                c.excluded.to_string(),
                c.degenerate.to_string(),
                c.percentage().map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentage_rules() {
        let mut c = CellSummary::default();
        assert_eq!(c.percentage(), None);
        c.included = 2;
        c.rejected = 2;
        assert_eq!(c.percentage(), Some(100.0));
        c.rejected = 1;
        assert_eq!(c.percentage(), Some(50.0));
    }

    #[test]
    fn empty_cell_is_blank_in_table() {
        let acc = BatchAccumulator::new(&["5".into()], &["RY".into(), "TD".into()]);
        let mut buf = Vec::new();
        acc.report().write_table_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trader,RY,TD\n5,,\n");
    }
}
