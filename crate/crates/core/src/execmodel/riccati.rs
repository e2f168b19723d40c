//! The feedback slope η_t of the optimal strategy.
//!
//! With the ansatz `v(t, q) = η_t q + χ_t` the adjoint equation reduces to
//!
//! ```text
//! η̇ = −(α/κ) η + η²/(2κ) + (α²/(2κ) − 2φ),   η_T = 2A
//! χ̇ = ((η − α)/(2κ)) χ,                       χ_T = 0   ⇒ χ ≡ 0
//! ```
//!
//! and the optimal rate is `ν̂ = ((α − η_t)/(2κ)) q`.

use serde::{Deserialize, Serialize};

use super::params::ExecutionParams;
use crate::error::{Error, Result};

/// Right-hand side of the Riccati equation for η.
pub fn riccati_rhs(eta: f64, p: &ExecutionParams) -> f64 {
    let (a, k, phi) = (p.alpha_perm, p.kappa_temp, p.running_penalty);
    -(a / k) * eta + eta * eta / (2.0 * k) + (a * a / (2.0 * k) - 2.0 * phi)
}

/// Closed-form η_t, valid when `α² < 4κφ`.
///
/// The textbook expression grows like `e^{2√(φ/κ)(T−t)}` in both numerator
/// and denominator; it is evaluated here after dividing both by that factor,
/// which keeps it finite for long horizons.
pub fn eta_closed_form(t: f64, p: &ExecutionParams) -> f64 {
    if t >= p.horizon {
        return 2.0 * p.terminal_penalty;
    }
    let k = p.kappa_temp;
    let a = p.alpha_perm / (2.0 * k);
    let r = (p.running_penalty / k).sqrt();
    let c0 = p.alpha_perm * p.alpha_perm / (2.0 * k) - 2.0 * p.running_penalty;
    let big_a = p.terminal_penalty;
    let e = (-2.0 * r * (p.horizon - t)).exp();
    let one_minus_e = -(-2.0 * r * (p.horizon - t)).exp_m1();
    let num = c0 * one_minus_e - 2.0 * big_a * ((a + r) - (a - r) * e);
    let den = (a - r) - (a + r) * e - (big_a / k) * one_minus_e;
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaBranch {
    ClosedForm,
    NumericalRiccati,
}

/// η on a backward RK4 grid in `s = T − t`, with cubic Hermite interpolation.
#[derive(Debug, Clone)]
struct NumericEta {
    s: Vec<f64>,
    eta: Vec<f64>,
    slope: Vec<f64>,
}

/// Step-size safety factor relative to the local stiffness `|∂f/∂η|⁻¹`.
const STIFFNESS_FRACTION: f64 = 0.1;
const MAX_STEPS: usize = 50_000_000;
const BLOWUP: f64 = 1e150;

impl NumericEta {
    fn integrate(p: &ExecutionParams) -> Result<Self> {
        let horizon = p.horizon;
        let h_max = horizon / 1.0e4;
        // d/ds η(T − s) = −rhs(η)
        let f = |eta: f64| -riccati_rhs(eta, p);
        let stiffness = |eta: f64| ((eta - p.alpha_perm) / p.kappa_temp).abs();

        let mut s = 0.0;
        let mut eta = 2.0 * p.terminal_penalty;
        let mut out = NumericEta {
            s: vec![0.0],
            eta: vec![eta],
            slope: vec![f(eta)],
        };
        while s < horizon {
            if out.s.len() > MAX_STEPS {
                return Err(Error::RiccatiBlowup { t: horizon - s });
            }
            let stiff = stiffness(eta);
            let mut h = h_max;
            if stiff > 0.0 {
                h = h.min(STIFFNESS_FRACTION / stiff);
            }
            // Land exactly on s = T.
            if s + h > horizon || horizon - (s + h) < 1e-12 * horizon {
                h = horizon - s;
            }
            let k1 = f(eta);
            let k2 = f(eta + 0.5 * h * k1);
            let k3 = f(eta + 0.5 * h * k2);
            let k4 = f(eta + h * k3);
            eta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
            if !eta.is_finite() || eta.abs() > BLOWUP {
                return Err(Error::RiccatiBlowup { t: horizon - s });
            }
            out.s.push(s);
            out.eta.push(eta);
            out.slope.push(f(eta));
        }
        Ok(out)
    }

    fn eval(&self, s: f64) -> f64 {
        let n = self.s.len();
        if s <= 0.0 {
            return self.eta[0];
        }
        if s >= self.s[n - 1] {
            return self.eta[n - 1];
        }
        let i = self.s.partition_point(|v| *v <= s) - 1;
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.eta[i] + h10 * h * self.slope[i] + h01 * self.eta[i + 1] + h11 * h * self.slope[i + 1]
    }
}

/// η_t for one parameter set, computed once and evaluated many times.
#[derive(Debug, Clone)]
pub struct EtaCurve {
    params: ExecutionParams,
    numeric: Option<NumericEta>,
}

impl EtaCurve {
    /// Closed form when `α² < 4κφ`, backward RK4 otherwise.
    pub fn new(p: &ExecutionParams) -> Result<Self> {
        p.validate()?;
        if p.closed_form_applies() {
            Ok(Self {
                params: p.clone(),
                numeric: None,
            })
        } else {
            Self::numerical(p)
        }
    }

    /// Always integrate the Riccati equation numerically.
    pub fn numerical(p: &ExecutionParams) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            params: p.clone(),
            numeric: Some(NumericEta::integrate(p)?),
        })
    }

    pub fn branch(&self) -> EtaBranch {
        if self.numeric.is_some() {
            EtaBranch::NumericalRiccati
        } else {
            EtaBranch::ClosedForm
        }
    }

    pub fn params(&self) -> &ExecutionParams {
        &self.params
    }

    pub fn eta(&self, t: f64) -> f64 {
        let p = &self.params;
        if t >= p.horizon {
            return 2.0 * p.terminal_penalty;
        }
        match &self.numeric {
            None => eta_closed_form(t, p),
            Some(n) => n.eval(p.horizon - t),
        }
    }

    /// `v(t, q) = η_t q` (χ ≡ 0).
    pub fn value_slope(&self, t: f64, q: f64) -> f64 {
        self.eta(t) * q
    }

    /// `ν̂(t, q) = ((α − η_t)/(2κ)) q`.
    pub fn optimal_rate(&self, t: f64, q: f64) -> f64 {
        let p = &self.params;
        (p.alpha_perm - self.eta(t)) / (2.0 * p.kappa_temp) * q
    }
}

fn check_time(t: f64, p: &ExecutionParams) -> Result<()> {
    if !(t >= 0.0 && t <= p.horizon) {
        return Err(Error::invalid("t", format!("must lie in [0, {}]", p.horizon)));
    }
    Ok(())
}

pub fn eta_fn(t: f64, p: &ExecutionParams) -> Result<f64> {
    check_time(t, p)?;
    Ok(EtaCurve::new(p)?.eta(t))
}

pub fn v_fn(t: f64, q: f64, p: &ExecutionParams) -> Result<f64> {
    check_time(t, p)?;
    Ok(EtaCurve::new(p)?.value_slope(t, q))
}

pub fn optimal_rate(t: f64, q: f64, p: &ExecutionParams) -> Result<f64> {
    check_time(t, p)?;
    Ok(EtaCurve::new(p)?.optimal_rate(t, q))
}

/// Max `|η̇ − rhs(η)|` of the closed form over `n_points` interior times,
/// with `η̇` from central differences.
pub fn riccati_residual(p: &ExecutionParams, n_points: usize) -> f64 {
    let horizon = p.horizon;
    let r = (p.running_penalty / p.kappa_temp).sqrt();
    let mut scale = horizon;
    if r > 0.0 {
        scale = scale.min(0.5 / r);
    }
    let jump = (2.0 * p.terminal_penalty - p.alpha_perm).abs();
    if jump > 0.0 {
        scale = scale.min(p.kappa_temp / jump);
    }
    let h = 1e-4 * scale;
    let n = n_points.max(1);
    (0..n)
        .map(|k| {
            let t = if n == 1 {
                0.5 * horizon
            } else {
                h + (horizon - 2.0 * h) * k as f64 / (n - 1) as f64
            };
            let d = (eta_closed_form(t + h, p) - eta_closed_form(t - h, p)) / (2.0 * h);
            (d - riccati_rhs(eta_closed_form(t, p), p)).abs()
        })
        .fold(0.0, f64::max)
}
