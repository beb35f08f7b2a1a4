//! Concave response of the influence rates to promotional spend.

use crate::error::{Error, Result};
use crate::math;

/// Shape `φ` of the response `rate(s) = base + b·φ(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseForm {
    /// `φ(s) = √s`
    Sqrt,
    /// `φ(s) = ln(1 + s)`
    Log,
}

impl ResponseForm {
    #[inline]
    pub fn phi(self, s: f64) -> f64 {
        match self {
            ResponseForm::Sqrt => math::sqrt(s),
            ResponseForm::Log => math::ln_1p(s),
        }
    }

    /// `φ'(s)`; `+∞` for the square root at `s = 0`.
    #[inline]
    pub fn dphi(self, s: f64) -> f64 {
        match self {
            ResponseForm::Sqrt => {
                if s > 0.0 {
                    0.5 / math::sqrt(s)
                } else {
                    f64::INFINITY
                }
            }
            ResponseForm::Log => 1.0 / (1.0 + s),
        }
    }

    /// Maximiser over `s ≥ 0` of `w·φ(s) − cost·s`.
    ///
    /// `w` is the current-value marginal worth of one unit of `φ`; `cost` is
    /// the weight of the spend in the profit rate (1 for a uniform channel,
    /// ½ for a channel that reaches half the population).
    #[inline]
    pub fn best_response(self, w: f64, cost: f64) -> f64 {
        match self {
            ResponseForm::Sqrt => {
                if w > 0.0 {
                    let root = w / (2.0 * cost);
                    root * root
                } else {
                    0.0
                }
            }
            ResponseForm::Log => (w / cost - 1.0).max(0.0),
        }
    }

    /// KKT residual of the stationarity condition `w·φ'(s) − cost = 0`
    /// subject to `s ≥ 0`, in current-value units.
    ///
    /// Returns `0` when the bound is active and the gradient points outward.
    pub fn stationarity_residual(self, w: f64, cost: f64, s: f64) -> f64 {
        if s > 0.0 {
            (w * self.dphi(s) - cost).abs()
        } else {
            match self {
                // derivative at the boundary is +∞·w − cost
                ResponseForm::Sqrt => {
                    if w > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                }
                ResponseForm::Log => (w - cost).max(0.0),
            }
        }
    }
}

/// Response of the external rate `p` and the internal rate `q` to spend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseModel {
    pub form: ResponseForm,
    pub p0: f64,
    pub bp: f64,
    pub q0: f64,
    pub bq: f64,
}

impl ResponseModel {
    pub fn new(form: ResponseForm, p0: f64, bp: f64, q0: f64, bq: f64) -> Result<Self> {
        let r = ResponseModel {
            form,
            p0,
            bp,
            q0,
            bq,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn sqrt(p0: f64, bp: f64, q0: f64, bq: f64) -> Result<Self> {
        Self::new(ResponseForm::Sqrt, p0, bp, q0, bq)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p0", self.p0), ("bp", self.bp), ("q0", self.q0), ("bq", self.bq)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Same model with the promotion switched off (`bp = bq = 0`).
    pub fn unresponsive(&self) -> Self {
        ResponseModel {
            bp: 0.0,
            bq: 0.0,
            ..*self
        }
    }

    pub fn eval_p(&self, sp: f64) -> Result<f64> {
        check_spend(sp)?;
        Ok(self.p(sp))
    }

    pub fn eval_q(&self, sq: f64) -> Result<f64> {
        check_spend(sq)?;
        Ok(self.q(sq))
    }

    /// Unchecked `p(s_p)` for the inner loops of the integrators.
    #[inline]
    pub fn p(&self, sp: f64) -> f64 {
        self.p0 + self.bp * self.form.phi(sp)
    }

    #[inline]
    pub fn q(&self, sq: f64) -> f64 {
        self.q0 + self.bq * self.form.phi(sq)
    }
}

fn check_spend(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "spend",
            value: s,
        })
    }
}
