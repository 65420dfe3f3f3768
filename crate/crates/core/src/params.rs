use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which triple of boundary conditions the plant carries at `x = 0, L`.
///
/// * `A`: `u(0) = u(L) = u_x(L) = 0`, control enters through `u(0)`.
/// * `B`: `u(0) = u_x(L) = u_xx(L) = 0`, control enters through `u(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcFamily {
    A,
    B,
}

impl std::fmt::Display for BcFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BcFamily::A => "A",
            BcFamily::B => "B",
        })
    }
}

impl std::str::FromStr for BcFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(BcFamily::A),
            "B" | "b" => Ok(BcFamily::B),
            other => Err(Error::Config(format!("unknown boundary family {other:?}"))),
        }
    }
}

/// Coefficients of `i u_t + i beta u_xxx + alpha u_xx + i delta u_x + |u|^p u = 0`
/// on `(0, L)`, plus the requested decay rate `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub beta: f64,
    pub alpha: f64,
    pub delta: f64,
    pub rate: f64,
    pub length: f64,
    /// Exponent of the focusing nonlinearity; `None` for the linear equation.
    pub power: Option<f64>,
    pub family: BcFamily,
}

impl PhysicsParams {
    pub fn new(beta: f64, alpha: f64, delta: f64, rate: f64, length: f64, family: BcFamily) -> Result<Self> {
        let p = Self {
            beta,
            alpha,
            delta,
            rate,
            length,
            power: None,
            family,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.beta, self.alpha, self.delta, self.rate, self.length];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("parameters must be finite".into()));
        }
        if self.beta == 0.0 {
            return Err(Error::Config("beta must be nonzero".into()));
        }
        if self.length <= 0.0 {
            return Err(Error::Config("length must be positive".into()));
        }
        if let Some(p) = self.power {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Config(format!("nonlinearity exponent must be positive, got {p}")));
            }
        }
        Ok(())
    }

    pub fn with_power(mut self, power: Option<f64>) -> Result<Self> {
        self.power = power;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn alpha_scaled(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn delta_scaled(&self) -> f64 {
        self.delta / self.beta
    }

    pub fn rate_scaled(&self) -> f64 {
        self.rate / self.beta
    }
}
