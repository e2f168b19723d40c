use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the execution model
///
/// ```text
/// dS = α ν dt + σ dW
/// dQ = ν dt + σ̃ dW̃
/// dX = −ν (S + κν) dt − σ̃ (S + κν) dW̃
/// ```
///
/// with reward `X_T + Q_T S_T − A (Q_T − q_T)² − φ ∫ Q_t² dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutionParams {
    /// Permanent impact α.
    pub alpha_perm: f64,
    /// Temporary impact κ.
    pub kappa_temp: f64,
    /// Price volatility σ.
    pub sigma_price: f64,
    /// Inventory volatility σ̃.
    pub sigma_inv: f64,
    /// Terminal penalty A.
    pub terminal_penalty: f64,
    /// Running inventory penalty φ.
    pub running_penalty: f64,
    /// Horizon T in seconds.
    pub horizon: f64,
    pub q0: f64,
    /// Terminal inventory target q_T.
    pub q_target: f64,
}

impl Default for ExecutionParams {
    fn default() -> Self {
        Self {
            alpha_perm: 1.27e-6,
            kappa_temp: 4.07e-7,
            sigma_price: 0.0,
            sigma_inv: 0.0,
            terminal_penalty: DEFAULT_TERMINAL_PENALTY,
            running_penalty: DEFAULT_RUNNING_PENALTY,
            horizon: 23_400.0,
            q0: 0.0,
            q_target: 0.0,
        }
    }
}

pub const DEFAULT_TERMINAL_PENALTY: f64 = 0.03;
pub const DEFAULT_RUNNING_PENALTY: f64 = 9.9e-7;

impl ExecutionParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha_perm,
            self.kappa_temp,
            self.sigma_price,
            self.sigma_inv,
            self.terminal_penalty,
            self.running_penalty,
            self.horizon,
            self.q0,
            self.q_target,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("params", "all parameters must be finite"));
        }
        if self.kappa_temp <= 0.0 {
            return Err(Error::invalid("kappa_temp", "must be positive"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        if self.sigma_inv < 0.0 || self.sigma_price < 0.0 {
            return Err(Error::invalid("sigma", "volatilities must be non-negative"));
        }
        if self.terminal_penalty < 0.0 || self.running_penalty < 0.0 {
            return Err(Error::invalid("penalty", "penalties must be non-negative"));
        }
        if self.q_target != 0.0 {
            // χ ≡ 0 and v(T, q) = 2Aq hold only for a zero target.
            return Err(Error::invalid(
                "q_target",
                "only q_T = 0 is supported; express the target through q0",
            ));
        }
        Ok(())
    }

    /// `α² < 4κφ`, the condition under which the closed form for η is used.
    pub fn closed_form_applies(&self) -> bool {
        self.alpha_perm * self.alpha_perm < 4.0 * self.kappa_temp * self.running_penalty
    }
}
