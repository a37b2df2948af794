use std::f64::consts::PI;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::special::{q_pochhammer, Nome, Order, Tau, TruncationPolicy};

/// Time-bandwidth products `λβ` for which the double-precision evaluators
/// are known to be well conditioned.
pub const SUPPORTED_TIME_BANDWIDTH: RangeInclusive<f64> = 0.2..=5.0;

/// Bandwidth `β`, sampling step `λ` and the constants derived from them.
///
/// | symbol | value |
/// |--------|-------|
/// | `Λ`    | `2π/λ` |
/// | `τ`    | `i(λβ)²/(4π)` |
/// | `q`    | `e^{iπτ} = e^{−(λβ)²/4}` |
/// | `q′`   | `e^{−4π²/(λβ)²}`, the nome of `−1/τ` |
/// | `Q₀`   | `(q²;q²)_∞` |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    beta: f64,
    lambda: f64,
    tau: Tau,
    q: Nome,
    q0: f64,
}

impl PulseParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        Self::with_policy(beta, lambda, &TruncationPolicy::default())
    }

    pub fn with_policy(beta: f64, lambda: f64, policy: &TruncationPolicy) -> Result<Self> {
        for (name, v) in [("beta", beta), ("lambda", lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let tau = Tau::from_time_bandwidth(lambda * beta)?;
        let q = tau.nome()?;
        let q2 = q.squared();
        let q0 = q_pochhammer(q2.value(), q2, Order::Infinite, policy)?;
        if !(q0 > 0.0 && q0 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Q0 = (q²;q²)_∞ = {q0} is outside (0, 1] for λβ = {}",
                lambda * beta
            )));
        }
        Ok(Self {
            beta,
            lambda,
            tau,
            q,
            q0,
        })
    }

    /// Like [`PulseParams::new`], but also checks an externally supplied
    /// nome against `e^{−(λβ)²/4}`.
    pub fn with_nome(beta: f64, lambda: f64, q: f64) -> Result<Self> {
        let nome = Nome::new(q)?;
        let params = Self::new(beta, lambda)?;
        let expected = params.q();
        if (nome.value() - expected).abs() > 1e-12 * expected {
            return Err(Error::InvalidParameter(format!(
                "nome {q} is inconsistent with λβ = {} (expected {expected})",
                params.time_bandwidth()
            )));
        }
        Ok(params)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Λ = 2π/λ`.
    pub fn big_lambda(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    /// `λβ`.
    pub fn time_bandwidth(&self) -> f64 {
        self.lambda * self.beta
    }

    pub fn tau(&self) -> Tau {
        self.tau
    }

    pub fn nome(&self) -> Nome {
        self.q
    }

    pub fn q(&self) -> f64 {
        self.q.value()
    }

    /// `q′ = e^{−4π²/(λβ)²}`; underflows to zero for `λβ ≲ 0.23`.
    pub fn q_prime(&self) -> f64 {
        (-PI / self.tau.imag()).exp()
    }

    /// `Q₀ = (q²;q²)_∞`.
    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn is_supported(&self) -> bool {
        SUPPORTED_TIME_BANDWIDTH.contains(&self.time_bandwidth())
    }

    /// Short deterministic identifier used in verification reports.
    pub fn digest(&self) -> String {
        format!("beta={:e};lambda={:e}", self.beta, self.lambda)
    }
}
