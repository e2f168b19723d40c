use std::io::Write;

use serde::{Deserialize, Serialize};

use super::test::{regular_test_with_draws, RegularTestConfig};
use crate::error::{Error, Result};
use crate::marketdata::IncrementSeries;
use crate::rng::{seeded, standard_normals};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma_prime: f64,
    pub gamma: f64,
    pub p_value: f64,
    pub reject_null: bool,
}

/// Regular test over the product grid `sigma_grid × gamma_grid`.
///
/// All points reuse the same standard-normal draws (from `cfg.seed`), rescaled
/// by each σ′, so a single-point sweep reproduces `regular_test` exactly.
pub fn sensitivity_sweep(
    incs: &IncrementSeries,
    sigma_grid: &[f64],
    gamma_grid: &[f64],
    cfg: &RegularTestConfig,
) -> Result<Vec<SweepPoint>> {
    if sigma_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::invalid("grid", "sweep grids must be nonempty"));
    }
    let eps = standard_normals(&mut seeded(cfg.seed), incs.len());
    let mut out = Vec::with_capacity(sigma_grid.len() * gamma_grid.len());
    for &sigma_prime in sigma_grid {
        for &gamma in gamma_grid {
            let point_cfg = RegularTestConfig {
                sigma_prime,
                gamma,
                ..cfg.clone()
            };
            point_cfg.validate()?;
            let r = regular_test_with_draws(incs, &point_cfg, &eps)?;
            out.push(SweepPoint {
                sigma_prime,
                gamma,
                p_value: r.p_value,
                reject_null: r.reject_null,
            });
        }
    }
    Ok(out)
}

/// `sigma_prime,gamma,p_value` CSV.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma_prime", "gamma", "p_value"])?;
    for p in points {
        w.write_record([p.sigma_prime.to_string(), p.gamma.to_string(), p.p_value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btest::{fictitious_augment, regular_test};

    #[test]
    fn single_point_matches_direct_test() {
        let n = 300;
        let base = IncrementSeries::regular(1.0, vec![0.0; n]).unwrap();
        let raw = fictitious_augment(&base, 2.0, &mut seeded(3)).unwrap();
        let cfg = RegularTestConfig {
            sigma_prime: 1.7,
            gamma: 4.0,
            seed: 21,
            ..Default::default()
        };
        let pts = sensitivity_sweep(&raw, &[1.7], &[4.0], &cfg).unwrap();
        let direct = regular_test(&raw, &cfg).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].p_value, direct.p_value);
    }

    #[test]
    fn grid_layout_and_csv() {
        let raw = IncrementSeries::regular(1.0, vec![0.1, -0.2, 0.3, 0.0]).unwrap();
        let pts = sensitivity_sweep(&raw, &[1.0, 2.0], &[3.0, 5.0, 7.0], &RegularTestConfig::default()).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].sigma_prime, pts[0].gamma), (1.0, 3.0));
        assert_eq!((pts[5].sigma_prime, pts[5].gamma), (2.0, 7.0));
        let mut buf = Vec::new();
        write_sweep_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sigma_prime,gamma,p_value\n1,3,"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let raw = IncrementSeries::regular(1.0, vec![0.1, -0.2]).unwrap();
        assert!(sensitivity_sweep(&raw, &[], &[3.0], &RegularTestConfig::default()).is_err());
    }
}
