//! Any finite weighted network: master equations for `[S_Ω]` coupled with
//! one costate `Ψ_Ω` per nonempty subset.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::economics::Economics;
use crate::error::{Error, Result};
use crate::master::{subset_label, MasterSystem};
use crate::network::GeneralNetwork;
use crate::response::ResponseForm;
use crate::solution::OptimalSolution;
use crate::solver::{self, BvpProblem, SolverConfig};
use crate::subset::SubsetIndex;

/// Largest network handed to the optimal-control solver (`2·(2^M − 1)`
/// equations).
pub const OPT_GENERAL_NODE_CAP: usize = 10;

#[derive(Debug, Clone)]
pub struct GeneralProblem {
    sys: MasterSystem,
    econ: Economics,
}

/// Value of `H` and its partial derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianPoint {
    pub value: f64,
    pub d_sp: f64,
    pub d_sq: f64,
    /// The square-root form at zero spend with positive worth.
    pub boundary_active: bool,
}

impl GeneralProblem {
    pub fn new(net: &GeneralNetwork, econ: Economics) -> Result<Self> {
        Self::with_cap(net, econ, OPT_GENERAL_NODE_CAP)
    }

    pub fn with_cap(net: &GeneralNetwork, econ: Economics, cap: usize) -> Result<Self> {
        econ.validate()?;
        Ok(GeneralProblem {
            sys: MasterSystem::with_cap(net, cap)?,
            econ,
        })
    }

    pub fn system(&self) -> &MasterSystem {
        &self.sys
    }

    fn check(&self, v: &[f64], what: &'static str) -> Result<()> {
        if v.len() != self.sys.dim() {
            return Err(Error::LengthMismatch {
                what,
                expected: self.sys.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Costate derivative at spend `(sp, sq)`.
    pub fn costate_rhs_at(&self, psi: &[f64], s: &[f64], t: f64, sp: f64, sq: f64) -> Result<Vec<f64>> {
        self.check(psi, "general costate")?;
        self.check(s, "general state")?;
        let mut out = vec![0.0; psi.len()];
        self.costate_rhs(t, s, psi, &[sp, sq], &mut out);
        Ok(out)
    }

    /// `H` together with `∂H/∂s_p` and `∂H/∂s_q`.
    pub fn hamiltonian_at(&self, s: &[f64], psi: &[f64], sp: f64, sq: f64, t: f64) -> Result<HamiltonianPoint> {
        self.check(psi, "general costate")?;
        self.check(s, "general state")?;
        let u = [sp, sq];
        let mut g = [0.0; 2];
        self.hamiltonian_gradient(t, s, psi, &u, &mut g);
        Ok(HamiltonianPoint {
            value: self.hamiltonian(t, s, psi, &u),
            d_sp: g[0],
            d_sq: g[1],
            boundary_active: g.iter().any(|v| v.is_infinite()),
        })
    }

    /// Sums `Ψ_Ω` over subsets of equal size; entry `n − 1` is size `n`.
    pub fn group_by_size(&self, psi: &[f64]) -> Vec<f64> {
        let m = self.sys.nodes();
        let mut out = vec![0.0; m];
        for (i, v) in psi.iter().enumerate() {
            out[SubsetIndex::mask(i).count_ones() as usize - 1] += v;
        }
        out
    }

    /// `Ψ_Ω − 1_{|Ω|=1}(γ/M)e^{−θt}`: the costate with the income of a
    /// single adoption folded in.
    #[inline]
    fn shifted(&self, psi: &[f64], mask: usize, g_over_m: f64) -> f64 {
        psi[mask - 1] - if mask.count_ones() == 1 { g_over_m } else { 0.0 }
    }
}

impl BvpProblem for GeneralProblem {
    fn economics(&self) -> &Economics {
        &self.econ
    }

    fn form(&self) -> ResponseForm {
        self.sys.form()
    }

    fn state_dim(&self) -> usize {
        self.sys.dim()
    }

    fn costate_dim(&self) -> usize {
        self.sys.dim()
    }

    fn initial_state(&self, x: &mut [f64]) {
        x.fill(1.0);
    }

    fn absorbing_state(&self, x: &mut [f64]) {
        x.fill(0.0);
    }

    fn state_rhs(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        self.sys.rhs(x, u[0], u[1], dx);
    }

    /// `dΨ_Ω/dt = (Ψ_Ω − 1_{|Ω|=1}(γ/M)e^{−θt})(p_Ω + Σ_{k∉Ω} q_{k→Ω})
    ///   − Σ_{m∈Ω}(1_{|Ω|>1}Ψ_{Ω∖m} − 1_{|Ω|=2}(γ/M)e^{−θt}) q_{m→Ω∖m}`.
    fn costate_rhs(&self, t: f64, _x: &[f64], psi: &[f64], u: &[f64], dpsi: &mut [f64]) {
        let idx = self.sys.index();
        let form = self.sys.form();
        let (phi_p, phi_q) = (form.phi(u[0]), form.phi(u[1]));
        let gm = self.econ.gamma * self.econ.discount(t) / idx.nodes() as f64;
        for mask in 1..=idx.full_mask() {
            let mut d = self.shifted(psi, mask, gm) * idx.exit_rate(mask, phi_p, phi_q);
            if mask.count_ones() > 1 {
                let mut members = mask;
                while members != 0 {
                    let m = members.trailing_zeros() as usize;
                    members &= members - 1;
                    let rest = mask & !(1 << m);
                    d -= self.shifted(psi, rest, gm) * idx.q(m, rest, phi_q);
                }
            }
            dpsi[mask - 1] = d;
        }
    }

    /// `w_p = −e^{θt} Σ_Ω Ψ̃_Ω b_{p,Ω} [S_Ω]` and
    /// `w_q = −e^{θt} Σ_Ω Ψ̃_Ω Σ_{k∉Ω} b_{q,k→Ω}([S_Ω] − [S_{Ω∪k}])`, with
    /// `Ψ̃` the shifted costate.
    fn worth(&self, t: f64, x: &[f64], psi: &[f64], w: &mut [f64]) {
        let idx = self.sys.index();
        let gm = self.econ.gamma * self.econ.discount(t) / idx.nodes() as f64;
        let full = idx.full_mask();
        let (mut wp, mut wq) = (0.0, 0.0);
        for mask in 1..=full {
            let ps = self.shifted(psi, mask, gm);
            if ps == 0.0 {
                continue;
            }
            let s = x[mask - 1];
            wp += ps * idx.p_gain(mask) * s;
            let mut acc = 0.0;
            let mut free = !mask & full;
            while free != 0 {
                let k = free.trailing_zeros() as usize;
                free &= free - 1;
                let g = idx.q_gain(k, mask);
                if g != 0.0 {
                    acc += g * (s - x[(mask | (1 << k)) - 1]);
                }
            }
            wq += ps * acc;
        }
        let gr = self.econ.growth(t);
        w[0] = -gr * wp;
        w[1] = -gr * wq;
    }

    fn adoption(&self, x: &[f64]) -> f64 {
        self.sys.adoption(x)
    }

    fn adoption_rate(&self, dx: &[f64]) -> f64 {
        let m = self.sys.nodes();
        -(0..m).map(|j| dx[SubsetIndex::singleton(j)]).sum::<f64>() / m as f64
    }

    fn state_labels(&self) -> Vec<String> {
        (1..=self.sys.index().full_mask()).map(subset_label).collect()
    }

    fn costate_labels(&self) -> Vec<String> {
        (1..=self.sys.index().full_mask())
            .map(|m| {
                let mut s = subset_label(m);
                s.replace_range(0..1, "psi");
                s
            })
            .collect()
    }
}

pub fn solve_optimal_general(net: &GeneralNetwork, econ: &Economics, cfg: &SolverConfig) -> Result<OptimalSolution> {
    solver::solve(&GeneralProblem::new(net, *econ)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economics::Horizon;
    use crate::network::complete_as_general;
    use crate::response::ResponseModel;

    fn problem(m: usize, gamma: f64) -> GeneralProblem {
        let r = ResponseModel::sqrt(0.01, 0.01, 0.1, 0.1).unwrap();
        let net = complete_as_general(m, &r).unwrap();
        GeneralProblem::new(&net, Economics::new(gamma, 0.01, Horizon::Infinite).unwrap()).unwrap()
    }

    #[test]
    fn zero_costate_is_fixed_without_income() {
        let mut pb = problem(3, 1.0);
        pb.econ.gamma = 0.0;
        let d = pb.costate_rhs_at(&[0.0; 7], &[0.5; 7], 1.0, 1.0, 1.0).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn singleton_rows_have_no_coupling() {
        let pb = problem(3, 1000.0);
        let mut psi = [0.0; 7];
        psi[0] = -100.0;
        let d = pb.costate_rhs_at(&psi, &[0.5; 7], 0.0, 0.0, 0.0).unwrap();
        // Ψ_{0} row: (Ψ − γ/3)(p + 2·q/2)
        assert!((d[0] - (-100.0 - 1000.0 / 3.0) * (0.01 + 0.1)).abs() < 1e-10);
    }

    #[test]
    fn rejects_large_networks_and_bad_lengths() {
        let r = ResponseModel::sqrt(0.01, 0.01, 0.1, 0.1).unwrap();
        let net = complete_as_general(11, &r).unwrap();
        let e = Economics::new(1.0, 0.0, Horizon::Infinite).unwrap();
        assert!(matches!(GeneralProblem::new(&net, e), Err(Error::NetworkTooLarge { .. })));
        assert!(problem(2, 1.0).costate_rhs_at(&[0.0; 2], &[0.0; 3], 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn unresponsive_gradient_is_minus_discount() {
        let r = ResponseModel::sqrt(0.01, 0.0, 0.1, 0.0).unwrap();
        let net = complete_as_general(2, &r).unwrap();
        let pb = GeneralProblem::new(&net, Economics::new(1000.0, 0.01, Horizon::Infinite).unwrap()).unwrap();
        let h = pb.hamiltonian_at(&[0.8, 0.8, 0.6], &[-300.0, -300.0, 50.0], 0.0, 0.0, 2.0).unwrap();
        let d = (-0.02f64).exp();
        assert!((h.d_sp + d).abs() < 1e-14 && (h.d_sq + d).abs() < 1e-14);
        assert!(!h.boundary_active);
    }
}
