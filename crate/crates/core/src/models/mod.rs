//! Optimal promotion for each network family.

pub mod complete;
pub mod general;
pub mod hetero;
pub mod infcomplete;
pub mod line;

use alloc::vec::Vec;

use crate::economics::{Economics, Horizon};
use crate::error::{Error, Result};
use crate::solution::OptimalSolution;

/// Shape of the total spending rate `s_p + s_q` over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpendScenario {
    MonotoneDecreasing,
    DecreaseIncrease,
    DecreaseIncreaseDecrease,
    /// Any other sign pattern of the derivative.
    Other,
}

impl SpendScenario {
    pub fn as_str(self) -> &'static str {
        match self {
            SpendScenario::MonotoneDecreasing => "monotone-decreasing",
            SpendScenario::DecreaseIncrease => "decrease-increase",
            SpendScenario::DecreaseIncreaseDecrease => "decrease-increase-decrease",
            SpendScenario::Other => "other",
        }
    }
}

/// Classifies a spend series by the sign changes of its discrete derivative;
/// differences below `1e−10·peak` carry no sign.
pub fn classify_total_spend(spend: &[f64]) -> SpendScenario {
    let peak = spend.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-10 * peak;
    let mut signs: Vec<i8> = Vec::new();
    for w in spend.windows(2) {
        let d = w[1] - w[0];
        let s = if d > floor {
            1
        } else if d < -floor {
            -1
        } else {
            continue;
        };
        if signs.last() != Some(&s) {
            signs.push(s);
        }
    }
    match signs.as_slice() {
        [] | [-1] => SpendScenario::MonotoneDecreasing,
        [-1, 1] => SpendScenario::DecreaseIncrease,
        [-1, 1, -1] => SpendScenario::DecreaseIncreaseDecrease,
        _ => SpendScenario::Other,
    }
}

/// One row of a horizon sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonRow {
    pub t_end: f64,
    pub outcome: Result<(f64, f64, f64)>,
}

impl HorizonRow {
    pub fn delta_pi(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.2)
    }
}

/// Runs `solve` at every finite horizon in `t_values` (sorted, positive);
/// one row per value with `(Π^opt, Π⁰, ΔΠ)` or the per-row failure.
pub fn sweep_horizon<F>(econ_base: &Economics, t_values: &[f64], mut solve: F) -> Result<Vec<HorizonRow>>
where
    F: FnMut(&Economics) -> Result<OptimalSolution>,
{
    if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("T", "horizons must be finite and > 0"));
    }
    if t_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("T", "horizons must be sorted"));
    }
    Ok(t_values
        .iter()
        .map(|&t| {
            let econ = econ_base.with_horizon(Horizon::Finite(t));
            HorizonRow {
                t_end: t,
                outcome: solve(&econ).map(|s| (s.pi_opt, s.pi0, s.delta_pi)),
            }
        })
        .collect())
}

/// First node where `f` reaches `level`.
pub(crate) fn first_reaching(f: &[f64], level: f64) -> Option<usize> {
    f.iter().position(|v| *v >= level)
}

/// Four-point one-sided derivative at the first node.
pub(crate) fn initial_slope(v: &[f64], h: f64) -> f64 {
    (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / (6.0 * h)
}
