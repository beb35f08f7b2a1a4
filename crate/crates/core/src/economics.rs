use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

/// Income per adoption, discount rate and planning horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Economics {
    pub gamma: f64,
    pub theta: f64,
    pub horizon: Horizon,
}

impl Economics {
    pub fn new(gamma: f64, theta: f64, horizon: Horizon) -> Result<Self> {
        let econ = Economics {
            gamma,
            theta,
            horizon,
        };
        econ.validate()?;
        Ok(econ)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("gamma", "must be finite and > 0"));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(Error::invalid("theta", "must be finite and >= 0"));
        }
        if let Horizon::Finite(t) = self.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid("horizon", "finite horizon must be > 0"));
            }
        }
        Ok(())
    }

    /// `e^{-θt}`
    #[inline]
    pub fn discount(&self, t: f64) -> f64 {
        math::exp(-self.theta * t)
    }

    /// `e^{θt}`
    #[inline]
    pub fn growth(&self, t: f64) -> f64 {
        math::exp(self.theta * t)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.horizon, Horizon::Infinite)
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }
}
