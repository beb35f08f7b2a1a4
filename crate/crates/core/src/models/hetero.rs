//! Infinite complete network made of two equal-size homogeneous groups.
//!
//! `f_k ∈ [0, ½]` is the adopting fraction of the whole population that
//! belongs to group `k`; `df_k/dt = (½ − f_k)(p^k + q^k(f₁ + f₂))`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::economics::Economics;
use crate::error::{Error, Result};
use crate::response::{ResponseForm, ResponseModel};
use crate::solution::OptimalSolution;
use crate::solver::{self, BvpProblem, SolverConfig};

/// How the promotion reaches the groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Targeting {
    /// One `(s_p, s_q)` for everybody.
    Uniform,
    /// Separate `(s_p^k, s_q^k)` per group, each paid by half the population.
    Targeted,
    /// Targeted channels forced to be equal across groups.
    TargetedTied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroProblem {
    groups: [ResponseModel; 2],
    econ: Economics,
    targeting: Targeting,
}

impl HeteroProblem {
    pub fn new(groups: [ResponseModel; 2], econ: Economics, targeting: Targeting) -> Result<Self> {
        groups[0].validate()?;
        groups[1].validate()?;
        if groups[0].form != groups[1].form {
            return Err(Error::invalid("groups", "both groups must share the response form"));
        }
        econ.validate()?;
        Ok(HeteroProblem { groups, econ, targeting })
    }

    pub fn targeting(&self) -> Targeting {
        self.targeting
    }

    /// `(s_p^k, s_q^k)` as used by group `k`.
    fn group_controls(&self, u: &[f64], k: usize) -> (f64, f64) {
        match self.targeting {
            Targeting::Uniform => (u[0], u[1]),
            _ => (u[k], u[2 + k]),
        }
    }

    /// State and costate derivatives `[df₁, df₂, dΨ₁, dΨ₂]`.
    pub fn rhs(&self, state: &[f64; 4], t: f64, u: &[f64]) -> Result<[f64; 4]> {
        if u.len() != self.control_dim() {
            return Err(Error::LengthMismatch {
                what: "hetero controls",
                expected: self.control_dim(),
                found: u.len(),
            });
        }
        for (k, f) in state[..2].iter().enumerate() {
            if !(-crate::PROB_TOL..=0.5 + crate::PROB_TOL).contains(f) {
                return Err(Error::OutOfRange {
                    what: if k == 0 { "f1" } else { "f2" },
                    value: *f,
                });
            }
        }
        if u.iter().any(|s| *s < 0.0) {
            return Err(Error::invalid("spend", "must be >= 0"));
        }
        let mut out = [0.0; 4];
        let (a, b) = out.split_at_mut(2);
        self.state_rhs(t, &state[..2], u, a);
        self.costate_rhs(t, &state[..2], &state[2..], u, b);
        Ok(out)
    }
}

impl BvpProblem for HeteroProblem {
    fn economics(&self) -> &Economics {
        &self.econ
    }

    fn form(&self) -> ResponseForm {
        self.groups[0].form
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn costate_dim(&self) -> usize {
        2
    }

    fn channels(&self) -> usize {
        match self.targeting {
            Targeting::Uniform => 1,
            _ => 2,
        }
    }

    fn control_cost(&self, _i: usize) -> f64 {
        match self.targeting {
            Targeting::Uniform => 1.0,
            _ => 0.5,
        }
    }

    fn initial_state(&self, x: &mut [f64]) {
        x.fill(0.0);
    }

    fn absorbing_state(&self, x: &mut [f64]) {
        x.fill(0.5);
    }

    fn state_rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let f = x[0] + x[1];
        for k in 0..2 {
            let (sp, sq) = self.group_controls(u, k);
            let g = &self.groups[k];
            dx[k] = (0.5 - x[k]) * (g.p(sp) + g.q(sq) * f);
        }
    }

    fn costate_rhs(&self, t: f64, x: &[f64], psi: &[f64], u: &[f64], dpsi: &mut [f64]) {
        let f = x[0] + x[1];
        let gd = self.econ.gamma * self.econ.discount(t);
        let mut shared = 0.0;
        let mut own = [0.0; 2];
        for k in 0..2 {
            let (sp, sq) = self.group_controls(u, k);
            let g = &self.groups[k];
            let q = g.q(sq);
            own[k] = (gd + psi[k]) * (g.p(sp) + q * f);
            shared += (gd + psi[k]) * (0.5 - x[k]) * q;
        }
        for j in 0..2 {
            dpsi[j] = own[j] - shared;
        }
    }

    fn worth(&self, t: f64, x: &[f64], psi: &[f64], w: &mut [f64]) {
        let gr = self.econ.growth(t);
        let f = x[0] + x[1];
        let mut b = [0.0; 2];
        for k in 0..2 {
            b[k] = (0.5 - x[k]) * (self.econ.gamma + psi[k] * gr);
        }
        let [g1, g2] = &self.groups;
        match self.targeting {
            Targeting::Uniform => {
                w[0] = g1.bp * b[0] + g2.bp * b[1];
                w[1] = f * (g1.bq * b[0] + g2.bq * b[1]);
            }
            Targeting::Targeted => {
                w[0] = g1.bp * b[0];
                w[1] = g2.bp * b[1];
                w[2] = f * g1.bq * b[0];
                w[3] = f * g2.bq * b[1];
            }
            Targeting::TargetedTied => {
                // each tied pair moves both groups at the full unit cost
                let wp = g1.bp * b[0] + g2.bp * b[1];
                let wq = f * (g1.bq * b[0] + g2.bq * b[1]);
                w[0] = 0.5 * wp;
                w[1] = 0.5 * wp;
                w[2] = 0.5 * wq;
                w[3] = 0.5 * wq;
            }
        }
    }

    fn adoption(&self, x: &[f64]) -> f64 {
        x[0] + x[1]
    }

    fn adoption_rate(&self, dx: &[f64]) -> f64 {
        dx[0] + dx[1]
    }

    fn state_labels(&self) -> Vec<String> {
        vec![String::from("f1"), String::from("f2")]
    }

    fn costate_labels(&self) -> Vec<String> {
        vec![String::from("psi1"), String::from("psi2")]
    }
}

pub fn solve_optimal_hetero_uniform(groups: &[ResponseModel; 2], econ: &Economics, cfg: &SolverConfig) -> Result<OptimalSolution> {
    solver::solve(&HeteroProblem::new(*groups, *econ, Targeting::Uniform)?, cfg)
}

pub fn solve_optimal_hetero_targeted(groups: &[ResponseModel; 2], econ: &Economics, cfg: &SolverConfig) -> Result<OptimalSolution> {
    solver::solve(&HeteroProblem::new(*groups, *econ, Targeting::Targeted)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economics::Horizon;

    fn groups() -> [ResponseModel; 2] {
        [
            ResponseModel::sqrt(0.01, 0.01, 0.1, 0.1).unwrap(),
            ResponseModel::sqrt(0.02, 0.02, 0.2, 0.2).unwrap(),
        ]
    }

    fn econ() -> Economics {
        Economics::new(1000.0, 0.01, Horizon::Infinite).unwrap()
    }

    #[test]
    fn no_adopters_no_internal_term() {
        let pb = HeteroProblem::new(groups(), econ(), Targeting::Uniform).unwrap();
        let d = pb.rhs(&[0.0, 0.0, -10.0, -20.0], 0.0, &[4.0, 9.0]).unwrap();
        assert!((d[0] - 0.5 * groups()[0].p(4.0)).abs() < 1e-15);
        assert!((d[1] - 0.5 * groups()[1].p(4.0)).abs() < 1e-15);
        assert!(pb.rhs(&[0.6, 0.0, 0.0, 0.0], 0.0, &[0.0, 0.0]).is_err());
        assert!(pb.rhs(&[0.1, 0.0, 0.0, 0.0], 0.0, &[0.0]).is_err());
    }

    #[test]
    fn tied_law_spends_like_uniform() {
        let uni = HeteroProblem::new(groups(), econ(), Targeting::Uniform).unwrap();
        let tied = HeteroProblem::new(groups(), econ(), Targeting::TargetedTied).unwrap();
        let (x, psi) = ([0.1, 0.2], [-300.0, -500.0]);
        let mut a = [0.0; 2];
        let mut b = [0.0; 4];
        uni.control_law(3.0, &x, &psi, &mut a);
        tied.control_law(3.0, &x, &psi, &mut b);
        for (i, v) in b.iter().enumerate() {
            assert!((v - a[i / 2]).abs() < 1e-12 * a[i / 2].max(1.0));
        }
        assert!((tied.spend(&b) - uni.spend(&a)).abs() < 1e-12);
    }
}
