//! The infinite line: states `f`, `y = ∫p`, costates `Ψ₁`, `Ψ₂`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::economics::Economics;
use crate::error::{Error, Result};
use crate::math;
use crate::response::{ResponseForm, ResponseModel};
use crate::solution::OptimalSolution;
use crate::solver::{self, BvpProblem, SolverConfig};

/// Stand-in for `y = ∞` at full adoption; `e^{−60}` is below rounding.
const Y_ABSORBING: f64 = 60.0;

/// `(f, y, Ψ₁, Ψ₂)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineState {
    pub f: f64,
    pub y: f64,
    pub psi1: f64,
    pub psi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineProblem {
    resp: ResponseModel,
    econ: Economics,
}

impl LineProblem {
    pub fn new(resp: ResponseModel, econ: Economics) -> Result<Self> {
        resp.validate()?;
        econ.validate()?;
        Ok(LineProblem { resp, econ })
    }

    /// `(df/dt, dy/dt, dΨ₁/dt, dΨ₂/dt)` at spend `(sp, sq)`.
    pub fn rhs(&self, s: &LineState, t: f64, sp: f64, sq: f64) -> Result<[f64; 4]> {
        if s.y < 0.0 {
            return Err(Error::OutOfRange { what: "y", value: s.y });
        }
        self.resp.eval_p(sp)?;
        self.resp.eval_q(sq)?;
        let x = [s.f, s.y];
        let psi = [s.psi1, s.psi2];
        let u = [sp, sq];
        let mut out = [0.0; 4];
        let (a, b) = out.split_at_mut(2);
        self.state_rhs(t, &x, &u, a);
        self.costate_rhs(t, &x, &psi, &u, b);
        Ok(out)
    }

    pub fn controls(&self, s: &LineState, t: f64) -> (f64, f64) {
        let mut u = [0.0; 2];
        self.control_law(t, &[s.f, s.y], &[s.psi1, s.psi2], &mut u);
        (u[0], u[1])
    }
}

/// `s_p = (b_p²/4)((γ+Ψ₁e^{θt})(1−f) + Ψ₂e^{θt})²`,
/// `s_q = (b_q²/4)((γ+Ψ₁e^{θt})(1−f)(1−e^{−y}))²`.
pub fn controls_sqrt_line(s: &LineState, t: f64, resp: &ResponseModel, econ: &Economics) -> (f64, f64) {
    let g = econ.growth(t);
    let b = (econ.gamma + s.psi1 * g) * (1.0 - s.f);
    let form = ResponseForm::Sqrt;
    (
        form.best_response(resp.bp * (b + s.psi2 * g), 1.0),
        form.best_response(resp.bq * b * (1.0 - math::exp(-s.y)), 1.0),
    )
}

impl BvpProblem for LineProblem {
    fn economics(&self) -> &Economics {
        &self.econ
    }

    fn form(&self) -> ResponseForm {
        self.resp.form
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn costate_dim(&self) -> usize {
        2
    }

    fn initial_state(&self, x: &mut [f64]) {
        x.fill(0.0);
    }

    fn absorbing_state(&self, x: &mut [f64]) {
        x[0] = 1.0;
        x[1] = Y_ABSORBING;
    }

    fn state_rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let p = self.resp.p(u[0]);
        let q = self.resp.q(u[1]);
        dx[0] = (p + q * (1.0 - math::exp(-x[1]))) * (1.0 - x[0]);
        dx[1] = p;
    }

    fn costate_rhs(&self, t: f64, x: &[f64], psi: &[f64], u: &[f64], dpsi: &mut [f64]) {
        let p = self.resp.p(u[0]);
        let q = self.resp.q(u[1]);
        let e = math::exp(-x[1]);
        let a = self.econ.gamma * self.econ.discount(t) + psi[0];
        dpsi[0] = a * (p + q * (1.0 - e));
        dpsi[1] = -a * (1.0 - x[0]) * q * e;
    }

    fn worth(&self, t: f64, x: &[f64], psi: &[f64], w: &mut [f64]) {
        let g = self.econ.growth(t);
        let b = (self.econ.gamma + psi[0] * g) * (1.0 - x[0]);
        w[0] = self.resp.bp * (b + psi[1] * g);
        w[1] = self.resp.bq * b * (1.0 - math::exp(-x[1]));
    }

    fn adoption(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn adoption_rate(&self, dx: &[f64]) -> f64 {
        dx[0]
    }

    fn state_labels(&self) -> Vec<String> {
        vec![String::from("f"), String::from("y")]
    }

    fn costate_labels(&self) -> Vec<String> {
        vec![String::from("psi1"), String::from("psi2")]
    }
}

pub fn solve_optimal_line(resp: &ResponseModel, econ: &Economics, cfg: &SolverConfig) -> Result<OptimalSolution> {
    solver::solve(&LineProblem::new(*resp, *econ)?, cfg)
}

/// Checks on a converged line solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LineReport {
    /// Largest violation, relative to `γe^{−θt}`, of the costate bounds
    /// `−γe^{−θt} ≤ Ψ₁ ≤ 0` and
    /// `max{0, (2√s_p/b_p − (1−f)γ)e^{−θt}} ≤ Ψ₂ ≤ (2√s_p/b_p)e^{−θt}`.
    pub bound_violation: f64,
    /// Largest increase of `Ψ₂` between nodes before `t*`.
    pub psi2_increase: f64,
    /// `Ψ₂(t_end)e^{θt_end}/γ`.
    pub psi2_terminal: f64,
}

#[allow(clippy::needless_range_loop)]
pub fn line_report(sol: &OptimalSolution, resp: &ResponseModel, econ: &Economics) -> LineReport {
    let grid = sol.grid();
    let sp = sol.sp();
    let mut viol: f64 = 0.0;
    for k in 0..grid.len() {
        let t = grid.time(k);
        let d = econ.discount(t);
        let scale = econ.gamma * d;
        let f = sol.state.get(k, 0);
        let (p1, p2) = (sol.costate.get(k, 0), sol.costate.get(k, 1));
        viol = viol.max((p1 / scale).max((-scale - p1) / scale));
        if resp.bp > 0.0 {
            let r = 2.0 * math::sqrt(sp[k]) / resp.bp;
            let lower = ((r - (1.0 - f) * econ.gamma) * d).max(0.0);
            let upper = r * d;
            viol = viol.max((lower - p2) / scale).max((p2 - upper) / scale);
        }
    }
    let end = match sol.diagnostics.t_star {
        Some(ts) => grid.cell_of(ts),
        None => grid.n_steps(),
    };
    let psi2: Vec<f64> = sol.costate.component(1);
    let inc = psi2[..=end].windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let n = grid.n_steps();
    LineReport {
        bound_violation: viol.max(0.0),
        psi2_increase: inc,
        psi2_terminal: psi2[n] * econ.growth(grid.t_end()) / econ.gamma,
    }
}
