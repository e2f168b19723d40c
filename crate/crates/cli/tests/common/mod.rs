#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use brownexec_core::rng::seeded;
use rand::Rng;

pub const SESSION: f64 = 10_800.0;

/// How a broker trades on a synthetic day.
#[derive(Clone, Copy)]
pub enum Style {
    /// Buys or sells a random lot at random times (random-walk inventory).
    Random { mean_gap: f64 },
    /// Buys 100 shares every `gap` seconds.
    Steady { gap: f64 },
    /// Does not trade.
    Idle,
}

/// Tape for one day: every `(trader, symbol, style)` triple trades against
/// broker "X". Prices follow a random walk per symbol.
pub fn synthetic_day(seed: u64, plan: &[(&str, &str, Style)]) -> String {
    let mut rng = seeded(seed);
    let mut rows: Vec<(f64, String, u64, String, String)> = Vec::new();
    for (trader, symbol, style) in plan {
        let mut t = 0.0;
        loop {
            let (gap, size, buys) = match *style {
                Style::Random { mean_gap } => {
                    let u: f64 = rng.random();
                    (-mean_gap * (1.0 - u).ln(), 100 * rng.random_range(1..=5u64), rng.random_bool(0.5))
                }
                Style::Steady { gap } => (gap, 100, true),
                Style::Idle => break,
            };
            t += gap;
            if t >= SESSION {
                break;
            }
            let (b, s) = if buys { (*trader, "X") } else { ("X", *trader) };
            rows.push((t, symbol.to_string(), size, b.to_string(), s.to_string()));
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut price = std::collections::BTreeMap::new();
    let mut out = String::from("timestamp,symbol,price,size,buyer,seller\n");
    // A self-trade anchor at the origin fixes the session clock.
    writeln!(out, "0,ZZ,1.00,1,X,X").unwrap();
    for (t, sym, size, b, s) in rows {
        let p = price.entry(sym.clone()).or_insert(50.0f64);
        *p = (*p + 0.01 * if rng.random_bool(0.5) { 1.0 } else { -1.0 }).max(1.0);
        writeln!(out, "{t:.3},{sym},{:.2},{size},{b},{s}", *p).unwrap();
    }
    out
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

pub fn brownexec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brownexec"))
        .args(args)
        .output()
        .expect("running brownexec")
}

/// All files of a directory, sorted by name, with their bytes.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

/// A two-day, two-trader, two-symbol corpus.
pub fn corpus(dir: &Path) -> Vec<PathBuf> {
    let day1 = synthetic_day(
        1,
        &[
            ("A", "RY", Style::Random { mean_gap: 20.0 }),
            ("A", "TD", Style::Random { mean_gap: 20.0 }),
            ("B", "RY", Style::Steady { gap: 30.0 }),
            ("B", "TD", Style::Random { mean_gap: 20.0 }),
        ],
    );
    let day2 = synthetic_day(
        2,
        &[
            ("A", "RY", Style::Random { mean_gap: 20.0 }),
            ("A", "TD", Style::Random { mean_gap: 20.0 }),
            ("B", "RY", Style::Steady { gap: 30.0 }),
            ("B", "TD", Style::Idle),
        ],
    );
    vec![write(dir, "day1.csv", &day1), write(dir, "day2.csv", &day2)]
}
