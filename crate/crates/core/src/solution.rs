//! Result of an optimal-promotion solve.

use alloc::string::String;
use alloc::vec::Vec;

use crate::grid::TimeGrid;
use crate::policy::PromotionPolicy;
use crate::solver::Method;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub method: Method,
    pub iterations: usize,
    /// Last sup-norm change of the state iterate (sweep).
    pub state_change: f64,
    /// Last sup-norm change of the node controls (sweep).
    pub control_change: f64,
    /// Change of `f` when the state is re-integrated from the final costate.
    pub fixed_point_residual: f64,
    /// `‖Ψ(t*) − target‖∞` (shooting).
    pub terminal_residual: f64,
    /// `max_t |∂H/∂s|` in present value, over all controls.
    pub stationarity_residual: f64,
    pub t_star: Option<f64>,
    pub t_eff: f64,
    pub tail_constants: Vec<f64>,
    /// Per iteration: sweep `(state change, control change)`, shooting
    /// `(terminal residual, step length)`.
    pub history: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub policy: PromotionPolicy,
    pub state: Trajectory,
    pub costate: Trajectory,
    pub baseline_state: Trajectory,
    pub state_labels: Vec<String>,
    pub costate_labels: Vec<String>,
    pub adoption: Trajectory,
    pub baseline_adoption: Trajectory,
    pub pi_opt: f64,
    pub pi0: f64,
    pub delta_pi: f64,
    pub diagnostics: Diagnostics,
}

impl OptimalSolution {
    pub fn grid(&self) -> &TimeGrid {
        self.policy.grid()
    }

    /// External spend of the first channel.
    pub fn sp(&self) -> &[f64] {
        self.policy.sp(0)
    }

    /// Internal spend of the first channel.
    pub fn sq(&self) -> &[f64] {
        self.policy.sq(0)
    }

    /// Spend per consumer at every node.
    pub fn total_spend(&self) -> Vec<f64> {
        (0..self.grid().len()).map(|k| self.policy.spend_rate(k)).collect()
    }

    pub fn f_opt(&self) -> &[f64] {
        self.adoption.values()
    }

    pub fn f0(&self) -> &[f64] {
        self.baseline_adoption.values()
    }
}
