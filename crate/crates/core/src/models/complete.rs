//! Homogeneous complete networks: `[Sⁿ]` and `Ψ_n` for `n = 1..M`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::economics::Economics;
use crate::error::{Error, Result};
use crate::response::{ResponseForm, ResponseModel};
use crate::solution::OptimalSolution;
use crate::solver::{self, BvpProblem, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteProblem {
    nodes: usize,
    resp: ResponseModel,
    econ: Economics,
    /// `c_n = n(M−n)/(M−1)`, index `n − 1`.
    coupling: Vec<f64>,
}

impl CompleteProblem {
    pub fn new(nodes: usize, resp: ResponseModel, econ: Economics) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::invalid("M", "complete network needs M >= 2"));
        }
        resp.validate()?;
        econ.validate()?;
        let m = nodes as f64;
        let coupling = (1..=nodes).map(|n| n as f64 * (m - n as f64) / (m - 1.0)).collect();
        Ok(CompleteProblem {
            nodes,
            resp,
            econ,
            coupling,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn check(&self, what: &'static str, len: usize) -> Result<()> {
        if len != self.nodes {
            return Err(Error::LengthMismatch {
                what,
                expected: self.nodes,
                found: len,
            });
        }
        Ok(())
    }

    /// `d[Sⁿ]/dt = −(np + c_n q)[Sⁿ] + c_n q [S^{n+1}]`.
    pub fn forward_rhs(&self, s: &[f64], t: f64, sp: f64, sq: f64) -> Result<Vec<f64>> {
        self.check("complete state", s.len())?;
        let mut out = vec![0.0; self.nodes];
        self.state_rhs(t, s, &[sp, sq], &mut out);
        Ok(out)
    }

    /// `dΨ_n/dt = (Ψ_n − 1_{n=1}γe^{−θt})(np + c_n q)
    ///            − (1_{n>1}Ψ_{n−1} − 1_{n=2}γe^{−θt}) c_{n−1} q`.
    pub fn costate_rhs_at(&self, psi: &[f64], s: &[f64], t: f64, sp: f64, sq: f64) -> Result<Vec<f64>> {
        self.check("complete state", s.len())?;
        self.check("complete costate", psi.len())?;
        let mut out = vec![0.0; self.nodes];
        self.costate_rhs(t, s, psi, &[sp, sq], &mut out);
        Ok(out)
    }

    /// Closed-form optimal `(s_p, s_q)` for either response form.
    pub fn controls(&self, s: &[f64], psi: &[f64], t: f64) -> Result<(f64, f64)> {
        self.check("complete state", s.len())?;
        self.check("complete costate", psi.len())?;
        let mut u = [0.0; 2];
        self.control_law(t, s, psi, &mut u);
        Ok((u[0], u[1]))
    }
}

/// Square-root response: `s_p = (b_p²/4)(γ[S¹] − e^{θt}Σ nΨ_n[Sⁿ])²` clamped
/// at a negative bracket, `s_q` likewise with the telescoped differences.
pub fn controls_sqrt_complete(s: &[f64], psi: &[f64], t: f64, resp: &ResponseModel, econ: &Economics) -> Result<(f64, f64)> {
    let r = ResponseModel { form: ResponseForm::Sqrt, ..*resp };
    CompleteProblem::new(s.len(), r, *econ)?.controls(s, psi, t)
}

/// Log response: `s = max(b·bracket − 1, 0)`.
pub fn controls_log_complete(s: &[f64], psi: &[f64], t: f64, resp: &ResponseModel, econ: &Economics) -> Result<(f64, f64)> {
    let r = ResponseModel { form: ResponseForm::Log, ..*resp };
    CompleteProblem::new(s.len(), r, *econ)?.controls(s, psi, t)
}

impl BvpProblem for CompleteProblem {
    fn economics(&self) -> &Economics {
        &self.econ
    }

    fn form(&self) -> ResponseForm {
        self.resp.form
    }

    fn state_dim(&self) -> usize {
        self.nodes
    }

    fn costate_dim(&self) -> usize {
        self.nodes
    }

    fn initial_state(&self, x: &mut [f64]) {
        x.fill(1.0);
    }

    fn absorbing_state(&self, x: &mut [f64]) {
        x.fill(0.0);
    }

    fn state_rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let p = self.resp.p(u[0]);
        let q = self.resp.q(u[1]);
        let m = self.nodes;
        for i in 0..m {
            let n = (i + 1) as f64;
            let c = self.coupling[i];
            let next = if i + 1 < m { x[i + 1] } else { 0.0 };
            dx[i] = -(n * p + c * q) * x[i] + c * q * next;
        }
    }

    fn costate_rhs(&self, t: f64, _x: &[f64], psi: &[f64], u: &[f64], dpsi: &mut [f64]) {
        let p = self.resp.p(u[0]);
        let q = self.resp.q(u[1]);
        let g = self.econ.gamma * self.econ.discount(t);
        for i in 0..self.nodes {
            let n = (i + 1) as f64;
            let own = psi[i] - if i == 0 { g } else { 0.0 };
            let mut d = own * (n * p + self.coupling[i] * q);
            if i > 0 {
                let prev = psi[i - 1] - if i == 1 { g } else { 0.0 };
                d -= prev * self.coupling[i - 1] * q;
            }
            dpsi[i] = d;
        }
    }

    fn worth(&self, t: f64, x: &[f64], psi: &[f64], w: &mut [f64]) {
        let gr = self.econ.growth(t);
        let m = self.nodes;
        let mut wp = self.econ.gamma * x[0];
        let mut wq = self.econ.gamma * self.coupling[0] * (x[0] - if m > 1 { x[1] } else { 0.0 });
        let mut sp = 0.0;
        let mut sq = 0.0;
        for i in 0..m {
            sp += (i + 1) as f64 * psi[i] * x[i];
            if i + 1 < m {
                sq += psi[i] * self.coupling[i] * (x[i] - x[i + 1]);
            }
        }
        wp -= gr * sp;
        wq -= gr * sq;
        w[0] = self.resp.bp * wp;
        w[1] = self.resp.bq * wq;
    }

    fn adoption(&self, x: &[f64]) -> f64 {
        1.0 - x[0]
    }

    fn adoption_rate(&self, dx: &[f64]) -> f64 {
        -dx[0]
    }

    fn state_labels(&self) -> Vec<String> {
        (1..=self.nodes).map(|n| format!("S{n}")).collect()
    }

    fn costate_labels(&self) -> Vec<String> {
        (1..=self.nodes).map(|n| format!("psi{n}")).collect()
    }
}

pub fn solve_optimal_complete(nodes: usize, resp: &ResponseModel, econ: &Economics, cfg: &SolverConfig) -> Result<OptimalSolution> {
    solver::solve(&CompleteProblem::new(nodes, *resp, *econ)?, cfg)
}
