use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_2_PI, PI};

/// `m_r = E|Z|^r` for `Z ~ N(0,1)`: `2^{r/2} π^{−1/2} Γ((r+1)/2)`.
///
/// Integer orders are evaluated exactly: `(r−1)!!` for even `r` and
/// `2^k k! √(2/π)` for odd `r = 2k+1`.
pub fn normal_abs_moment(r: f64) -> f64 {
    assert!(r >= 0.0, "moment order must be non-negative");
    if r.fract() == 0.0 && r <= 170.0 {
        let r = r as u32;
        if r % 2 == 0 {
            return (1..r).step_by(2).map(f64::from).product();
        }
        let k = (r - 1) / 2;
        let fact: f64 = (1..=k).map(f64::from).product();
        return 2f64.powi(k as i32) * fact * FRAC_2_PI.sqrt();
    }
    2f64.powf(r / 2.0) * gamma((r + 1.0) / 2.0) / PI.sqrt()
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Upper-tail probability `1 − Φ(x)`, computed without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

/// One-sided critical value `z_α = Φ⁻¹(1 − α)`.
pub fn upper_quantile(alpha: f64) -> f64 {
    std_normal().inverse_cdf(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, standard_normals};

    #[test]
    fn integer_moments() {
        assert_eq!(normal_abs_moment(0.0), 1.0);
        assert_eq!(normal_abs_moment(2.0), 1.0);
        assert_eq!(normal_abs_moment(4.0), 3.0);
        assert_eq!(normal_abs_moment(6.0), 15.0);
        assert!((normal_abs_moment(1.0) - 0.797_884_560_802_865_4).abs() < 1e-15);
        assert!((normal_abs_moment(3.0) - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fractional_order_matches_gamma_form_near_integers() {
        let near = normal_abs_moment(2.0 + 1e-9);
        assert!((near - 1.0).abs() < 1e-8);
    }

    #[test]
    fn first_moment_monte_carlo() {
        let z = standard_normals(&mut seeded(2024), 1_000_000);
        let mean = z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64;
        assert!((mean - normal_abs_moment(1.0)).abs() < 1e-3, "mean {mean}");
    }

    #[test]
    fn half_moment_monte_carlo() {
        let z = standard_normals(&mut seeded(7), 1_000_000);
        let mean = z.iter().map(|v| v.abs().sqrt()).sum::<f64>() / z.len() as f64;
        assert!((mean - normal_abs_moment(0.5)).abs() < 2e-3);
    }

    #[test]
    fn quantile_and_tail() {
        assert!((upper_quantile(0.05) - 1.644_853_626_951_472_2).abs() < 1e-9);
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) + normal_sf(1.0) - 1.0).abs() < 1e-15);
    }
}
