//! Realized-variation building blocks shared by both tests.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::IncrementSeries;
use crate::rng::standard_normals;

/// Estimator for the long-run variance rate η used in the truncation level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaEstimator {
    /// `Σ Δ_i² / T`.
    #[default]
    SampleVariance,
    /// `(π/2) Σ |Δ_i||Δ_{i+1}| / T`, robust to isolated jumps.
    Bipower,
}

/// `u_n = γ √η √Δ_n`.
pub fn truncation_level(gamma: f64, eta: f64, delta_n: f64) -> f64 {
    gamma * eta.sqrt() * delta_n.sqrt()
}

/// Variance rate per second. `T` is the time spanned by the increments.
pub fn estimate_eta(incs: &IncrementSeries, method: EtaEstimator) -> Result<f64> {
    if incs.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: incs.len(),
        });
    }
    let span = incs.span();
    let x = &incs.increments;
    let sum = match method {
        EtaEstimator::SampleVariance => x.iter().map(|d| d * d).sum::<f64>(),
        EtaEstimator::Bipower => FRAC_PI_2 * x.windows(2).map(|w| w[0].abs() * w[1].abs()).sum::<f64>(),
    };
    Ok(sum / span)
}

/// `(Σ Δ² 𝟙{|Δ| ≤ u_n}, #retained)`.
pub fn truncated_realized_volatility(incs: &IncrementSeries, u_n: f64) -> (f64, usize) {
    incs.increments
        .iter()
        .filter(|d| d.abs() <= u_n)
        .fold((0.0, 0), |(s, n), d| (s + d * d, n + 1))
}

/// `Σ Δ⁴ 𝟙{|Δ| ≤ u_n}`.
pub fn truncated_quarticity(incs: &IncrementSeries, u_n: f64) -> f64 {
    incs.increments
        .iter()
        .filter(|d| d.abs() <= u_n)
        .map(|d| d.powi(4))
        .sum()
}

/// `B^n(p,q) = Σ Δ(n,i)^{q+1−p/2} |Δ_i|^p`.
pub fn power_variation(incs: &IncrementSeries, p: f64, q: f64) -> f64 {
    let e = q + 1.0 - p / 2.0;
    incs.interval_lengths
        .iter()
        .zip(&incs.increments)
        .map(|(dt, d)| weighted_power(*dt, e, *d, p))
        .sum()
}

fn weighted_power(dt: f64, time_exp: f64, d: f64, p: f64) -> f64 {
    let w = if time_exp == 0.0 { 1.0 } else { dt.powf(time_exp) };
    let a = d.abs();
    let m = if p == 2.0 {
        a * a
    } else if p == 4.0 {
        let s = a * a;
        s * s
    } else {
        a.powf(p)
    };
    w * m
}

/// Add `σ′ √Δ(n,i) ε_i` to each increment, with `ε` drawn from `rng`.
pub fn fictitious_augment<R: Rng + ?Sized>(
    incs: &IncrementSeries,
    sigma_prime: f64,
    rng: &mut R,
) -> Result<IncrementSeries> {
    let eps = standard_normals(rng, incs.len());
    augment_with_draws(incs, sigma_prime, &eps)
}

/// `fictitious_augment` with the standard-normal draws supplied by the caller.
pub fn augment_with_draws(incs: &IncrementSeries, sigma_prime: f64, eps: &[f64]) -> Result<IncrementSeries> {
    if !(sigma_prime.is_finite() && sigma_prime >= 0.0) {
        return Err(Error::invalid("sigma_prime", "must be finite and non-negative"));
    }
    if eps.len() != incs.len() {
        return Err(Error::invalid("eps", "one draw per increment required"));
    }
    let increments = incs
        .increments
        .iter()
        .zip(&incs.interval_lengths)
        .zip(eps)
        .map(|((d, dt), e)| d + sigma_prime * dt.sqrt() * e)
        .collect();
    Ok(IncrementSeries {
        interval_lengths: incs.interval_lengths.clone(),
        increments,
        horizon: incs.horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn unit(incs: &[f64]) -> IncrementSeries {
        IncrementSeries::regular(1.0, incs.to_vec()).unwrap()
    }

    #[test]
    fn truncation_level_examples() {
        assert_eq!(truncation_level(3.0, 4.0, 1.0), 6.0);
        assert_eq!(truncation_level(3.0, 0.0, 1.0), 0.0);
        assert!((truncation_level(3.0, 2.5, 300.0) - 82.158_383_625_774_9).abs() < 1e-9);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(estimate_eta(&unit(&[0.0; 5]), EtaEstimator::SampleVariance).unwrap(), 0.0);
        assert_eq!(estimate_eta(&unit(&[0.0; 5]), EtaEstimator::Bipower).unwrap(), 0.0);
        let eta = estimate_eta(&unit(&[1.0; 100]), EtaEstimator::SampleVariance).unwrap();
        assert_eq!(eta, 1.0);
        assert!(matches!(
            estimate_eta(&unit(&[1.0]), EtaEstimator::SampleVariance),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn bipower_ignores_single_jump_better_than_sample_variance() {
        let mut rng = seeded(11);
        let n = 10_000;
        let dt = 1.0 / n as f64;
        let base = IncrementSeries::regular(dt, vec![0.0; n]).unwrap();
        let mut aug = fictitious_augment(&base, 1.0, &mut rng).unwrap();
        aug.increments[n / 2] += 2.0;
        let sv = estimate_eta(&aug, EtaEstimator::SampleVariance).unwrap();
        let bp = estimate_eta(&aug, EtaEstimator::Bipower).unwrap();
        assert!(sv > 4.0);
        assert!((bp - 1.0).abs() < 0.1, "bipower {bp}");
    }

    #[test]
    fn truncated_sums() {
        let incs = unit(&[1.0, 2.0, 10.0]);
        assert_eq!(truncated_realized_volatility(&incs, 3.0), (5.0, 2));
        assert_eq!(truncated_quarticity(&incs, 3.0), 17.0);
        assert_eq!(truncated_realized_volatility(&incs, 0.0), (0.0, 0));
        assert_eq!(truncated_realized_volatility(&incs, f64::INFINITY), (105.0, 3));
        assert_eq!(truncated_quarticity(&unit(&[0.0; 4]), 1.0), 0.0);
    }

    #[test]
    fn power_variation_examples() {
        let incs = IncrementSeries::new(vec![1.0, 2.0], vec![3.0, -2.0], 3.0).unwrap();
        assert_eq!(power_variation(&incs, 2.0, 0.0), 13.0);
        assert_eq!(power_variation(&incs, 4.0, 1.0), 97.0);
        assert_eq!(power_variation(&unit(&[0.0; 3]), 3.0, 0.5), 0.0);
        // Non-zero time exponent: B(2,1) = Σ Δt |Δ|².
        assert_eq!(power_variation(&incs, 2.0, 1.0), 9.0 + 8.0);
    }

    #[test]
    fn augment_identity_and_determinism() {
        let incs = unit(&[1.0, -2.0, 0.5]);
        let same = fictitious_augment(&incs, 0.0, &mut seeded(1)).unwrap();
        assert_eq!(same, incs);
        let a = fictitious_augment(&incs, 2.0, &mut seeded(5)).unwrap();
        let b = fictitious_augment(&incs, 2.0, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.interval_lengths, incs.interval_lengths);
    }

    #[test]
    fn augment_variance_matches_c_prime() {
        let incs = unit(&vec![0.0; 100_000]);
        let out = fictitious_augment(&incs, 2.0, &mut seeded(77)).unwrap();
        let n = out.len() as f64;
        let mean = out.increments.iter().sum::<f64>() / n;
        let var = out.increments.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((3.9..=4.1).contains(&var), "variance {var}");
    }

    #[test]
    fn eta_recovers_brownian_variance() {
        let n = 100_000;
        let base = IncrementSeries::regular(1.0 / n as f64, vec![0.0; n]).unwrap();
        let path = fictitious_augment(&base, 2.0, &mut seeded(3)).unwrap();
        for m in [EtaEstimator::SampleVariance, EtaEstimator::Bipower] {
            let eta = estimate_eta(&path, m).unwrap();
            assert!((3.8..=4.2).contains(&eta), "{m:?}: {eta}");
        }
    }

    #[test]
    fn quarticity_limit() {
        // Σ Δ⁴ ≈ 3 (c+c′)² T Δ_n; the Δ_n^{-1}-scaled sum converges to 3(c+c′)²T.
        let n = 100_000;
        let dt = 1.0 / n as f64;
        let base = IncrementSeries::regular(dt, vec![0.0; n]).unwrap();
        let path = fictitious_augment(&base, 1.5, &mut seeded(8)).unwrap();
        let b = truncated_quarticity(&path, f64::INFINITY) / dt;
        let target = 3.0 * 1.5f64.powi(4);
        assert!((b / target - 1.0).abs() < 0.05, "{b} vs {target}");
    }
}
