//! The infinite complete network: a single state `f` and costate `Ψ`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{classify_total_spend, first_reaching, initial_slope, SpendScenario};
use crate::economics::{Economics, Horizon};
use crate::error::{Error, Result};
use crate::math;
use crate::response::{ResponseForm, ResponseModel};
use crate::solution::OptimalSolution;
use crate::solver::{self, BvpProblem, SolverConfig};
use crate::PROB_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct InfCompleteProblem {
    resp: ResponseModel,
    econ: Economics,
}

impl InfCompleteProblem {
    pub fn new(resp: ResponseModel, econ: Economics) -> Result<Self> {
        resp.validate()?;
        econ.validate()?;
        Ok(InfCompleteProblem { resp, econ })
    }

    pub fn response(&self) -> &ResponseModel {
        &self.resp
    }

    /// `(df/dt, dΨ/dt)` with `df/dt = (1−f)(p + qf)` and
    /// `dΨ/dt = (γe^{−θt} + Ψ)(p + q(2f−1))`.
    pub fn rhs(&self, f: f64, psi: f64, t: f64, sp: f64, sq: f64) -> Result<(f64, f64)> {
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&f) {
            return Err(Error::OutOfRange { what: "f", value: f });
        }
        let (p, q) = (self.resp.eval_p(sp)?, self.resp.eval_q(sq)?);
        let g = self.econ.gamma * self.econ.discount(t);
        Ok(((1.0 - f) * (p + q * f), (g + psi) * (p + q * (2.0 * f - 1.0))))
    }

    /// Closed-form optimal `(s_p, s_q)`.
    pub fn controls(&self, f: f64, psi: f64, t: f64) -> (f64, f64) {
        let mut u = [0.0; 2];
        self.control_law(t, &[f], &[psi], &mut u);
        (u[0], u[1])
    }
}

/// `s_p = (b_p²/4)((1−f)(Ψe^{θt}+γ))²`, `s_q = (b_q²/b_p²) f² s_p`.
pub fn controls_sqrt_infcomplete(f: f64, psi: f64, t: f64, resp: &ResponseModel, econ: &Economics) -> (f64, f64) {
    let b = (1.0 - f) * (econ.gamma + psi * econ.growth(t));
    (
        ResponseForm::Sqrt.best_response(resp.bp * b, 1.0),
        ResponseForm::Sqrt.best_response(resp.bq * f * b, 1.0),
    )
}

impl BvpProblem for InfCompleteProblem {
    fn economics(&self) -> &Economics {
        &self.econ
    }

    fn form(&self) -> ResponseForm {
        self.resp.form
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn costate_dim(&self) -> usize {
        1
    }

    fn initial_state(&self, x: &mut [f64]) {
        x[0] = 0.0;
    }

    fn absorbing_state(&self, x: &mut [f64]) {
        x[0] = 1.0;
    }

    fn state_rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let f = x[0];
        dx[0] = (1.0 - f) * (self.resp.p(u[0]) + self.resp.q(u[1]) * f);
    }

    fn costate_rhs(&self, t: f64, x: &[f64], psi: &[f64], u: &[f64], dpsi: &mut [f64]) {
        let f = x[0];
        let g = self.econ.gamma * self.econ.discount(t);
        dpsi[0] = (g + psi[0]) * (self.resp.p(u[0]) + self.resp.q(u[1]) * (2.0 * f - 1.0));
    }

    fn worth(&self, t: f64, x: &[f64], psi: &[f64], w: &mut [f64]) {
        let f = x[0];
        let b = (1.0 - f) * (self.econ.gamma + psi[0] * self.econ.growth(t));
        w[0] = self.resp.bp * b;
        w[1] = self.resp.bq * f * b;
    }

    fn adoption(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn adoption_rate(&self, dx: &[f64]) -> f64 {
        dx[0]
    }

    fn state_labels(&self) -> Vec<String> {
        vec![String::from("f")]
    }

    fn costate_labels(&self) -> Vec<String> {
        vec![String::from("psi")]
    }
}

pub fn solve_optimal_infcomplete(resp: &ResponseModel, econ: &Economics, cfg: &SolverConfig) -> Result<OptimalSolution> {
    solver::solve(&InfCompleteProblem::new(*resp, *econ)?, cfg)
}

/// Numerical read-out of the analytic properties of the optimal policy.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryReport {
    pub sp0: f64,
    pub sq0: f64,
    /// One-sided estimate of `s_p'(0)`.
    pub sp_slope0: f64,
    /// `s_p'(0) + 2s_p(0)(q₀−θ) + √s_p(0)·θγb_p`; `None` for the log form.
    pub slope_identity_residual: Option<f64>,
    /// Largest violation of `−γe^{−θt} ≤ Ψ ≤ 0` once `f ≥ ½`.
    pub costate_bound_violation: f64,
    /// `s_p(t_end)/max s_p` and `s_q(t_end)/max s_q`.
    pub terminal_ratio: (f64, f64),
    pub total_spend_initially_decreasing: bool,
    pub scenario: SpendScenario,
}

impl CorollaryReport {
    /// True when every check that applies to the horizon holds.
    pub fn holds(&self, econ: &Economics, slope_tol: f64) -> bool {
        let slope_ok = self
            .slope_identity_residual
            .is_none_or(|r| r.abs() < slope_tol * self.sp_slope0.abs());
        let terminal_ok = match econ.horizon {
            Horizon::Infinite => self.terminal_ratio.0 < 1e-3 && self.terminal_ratio.1 < 1e-3,
            Horizon::Finite(_) => self.terminal_ratio.0 > 0.0 && self.terminal_ratio.1 > 0.0,
        };
        self.sq0 == 0.0 && self.sp0 > 0.0 && self.sp_slope0 < 0.0 && slope_ok && self.costate_bound_violation <= 0.0 && terminal_ok
    }
}

fn peak(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(*b))
}

pub fn corollary_report(sol: &OptimalSolution, resp: &ResponseModel, econ: &Economics) -> CorollaryReport {
    let grid = sol.grid();
    let (sp, sq) = (sol.sp(), sol.sq());
    let sp0 = sp[0];
    let slope = initial_slope(sp, grid.step());
    let slope_identity_residual = match resp.form {
        ResponseForm::Sqrt => Some(slope + 2.0 * sp0 * (resp.q0 - econ.theta) + math::sqrt(sp0) * econ.theta * econ.gamma * resp.bp),
        ResponseForm::Log => None,
    };
    let f = sol.f_opt();
    let mut viol: f64 = 0.0;
    if let Some(k_half) = first_reaching(f, 0.5) {
        for k in k_half..grid.len() {
            let psi = sol.costate.get(k, 0);
            let lower = -econ.gamma * econ.discount(grid.time(k));
            let tol = 1e-8 * econ.gamma * econ.discount(grid.time(k));
            viol = viol.max(psi - tol).max(lower - psi - tol);
        }
    }
    let n = grid.n_steps();
    let ratio = |v: &[f64]| if peak(v) > 0.0 { v[n] / peak(v) } else { 0.0 };
    let total = sol.total_spend();
    CorollaryReport {
        sp0,
        sq0: sq[0],
        sp_slope0: slope,
        slope_identity_residual,
        costate_bound_violation: viol.max(0.0),
        terminal_ratio: (ratio(sp), ratio(sq)),
        total_spend_initially_decreasing: total[1] < total[0],
        scenario: classify_total_spend(&total),
    }
}
