//! Master equations of the Bass model on a finite network.
//!
//! The state is the vector of survival probabilities `[S_Ω]` over all
//! nonempty subsets, indexed as in [`SubsetIndex`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::GeneralNetwork;
use crate::policy::{ControlInterp, PromotionPolicy};
use crate::response::ResponseForm;
use crate::solver::rk4::integrate_range;
use crate::subset::SubsetIndex;
use crate::trajectory::Trajectory;

/// Slack allowed on `[S_Ω] ∈ [0, 1]` before a step is rejected.
pub const MASTER_BOUND_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MasterSystem {
    index: SubsetIndex,
    form: ResponseForm,
}

impl MasterSystem {
    pub fn new(net: &GeneralNetwork) -> Result<Self> {
        Ok(MasterSystem {
            index: SubsetIndex::new(net)?,
            form: net.form(),
        })
    }

    pub fn with_cap(net: &GeneralNetwork, cap: usize) -> Result<Self> {
        Ok(MasterSystem {
            index: SubsetIndex::with_cap(net, cap)?,
            form: net.form(),
        })
    }

    pub fn index(&self) -> &SubsetIndex {
        &self.index
    }

    pub fn nodes(&self) -> usize {
        self.index.nodes()
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn form(&self) -> ResponseForm {
        self.form
    }

    /// `d[S_Ω]/dt = −(p_Ω + Σ_{k∉Ω} q_{k→Ω})[S_Ω] + Σ_{k∉Ω} q_{k→Ω}[S_{Ω∪k}]`
    /// at spend `(sp, sq)`.
    pub fn rhs(&self, state: &[f64], sp: f64, sq: f64, out: &mut [f64]) {
        let idx = &self.index;
        let phi_p = self.form.phi(sp);
        let phi_q = self.form.phi(sq);
        for mask in 1..=idx.full_mask() {
            let s = state[mask - 1];
            let mut d = -idx.exit_rate(mask, phi_p, phi_q) * s;
            let mut free = !mask & idx.full_mask();
            while free != 0 {
                let k = free.trailing_zeros() as usize;
                free &= free - 1;
                d += idx.q(k, mask, phi_q) * state[(mask | (1 << k)) - 1];
            }
            out[mask - 1] = d;
        }
    }

    /// Indices of the singleton survival probabilities, node order.
    pub fn singleton_indices(&self) -> Vec<usize> {
        (0..self.nodes()).map(SubsetIndex::singleton).collect()
    }

    /// `f = 1 − (1/M) Σ_j [S_j]` from one state vector.
    pub fn adoption(&self, state: &[f64]) -> f64 {
        let m = self.nodes();
        let sum: f64 = (0..m).map(|j| state[SubsetIndex::singleton(j)]).sum();
        1.0 - sum / m as f64
    }
}

/// Master right-hand side with the spend read from `policy` at time `t`.
pub fn master_rhs(
    sys: &MasterSystem,
    state: &[f64],
    t: f64,
    policy: &PromotionPolicy,
    out: &mut [f64],
) -> Result<()> {
    for (what, len) in [("master state", state.len()), ("master derivative", out.len())] {
        if len != sys.dim() {
            return Err(Error::LengthMismatch {
                what,
                expected: sys.dim(),
                found: len,
            });
        }
    }
    let grid = policy.grid();
    let cell = grid.cell_of(t);
    let w = ((t - grid.time(cell)) / grid.step()).clamp(0.0, 1.0);
    let (sp, sq) = policy.sample(0, cell, w, ControlInterp::Linear);
    sys.rhs(state, sp, sq, out);
    Ok(())
}

/// Solves the master equations from `[S_Ω](0) = 1` on the policy grid.
pub fn solve_master(net: &GeneralNetwork, policy: &PromotionPolicy, interp: ControlInterp) -> Result<Trajectory> {
    let sys = MasterSystem::new(net)?;
    solve_master_system(&sys, policy, interp)
}

pub fn solve_master_system(sys: &MasterSystem, policy: &PromotionPolicy, interp: ControlInterp) -> Result<Trajectory> {
    if policy.channels() != 1 {
        return Err(Error::invalid("policy", "master equations take a single uniform channel"));
    }
    let grid = *policy.grid();
    let dim = sys.dim();
    let mut values = vec![0.0; grid.len() * dim];
    values[..dim].fill(1.0);
    let mut rhs = |p: crate::solver::rk4::StagePoint, y: &[f64], dy: &mut [f64]| {
        let (sp, sq) = policy.sample(0, p.cell, p.weight, interp);
        sys.rhs(y, sp, sq, dy);
    };
    integrate_range(&grid, dim, &mut values, None, 0, grid.n_steps(), &mut rhs)?;
    if let Some((i, &v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| **v < -MASTER_BOUND_TOL || **v > 1.0 + MASTER_BOUND_TOL)
    {
        return Err(Error::ProbabilityBound { step: i / dim, value: v });
    }
    Trajectory::new(grid, dim, values, "S")
}

/// Singleton columns `[S_j]` of a master trajectory.
pub fn singletons(traj: &Trajectory, nodes: usize) -> Result<Trajectory> {
    let rows = traj.len();
    let mut v = Vec::with_capacity(rows * nodes);
    for k in 0..rows {
        let r = traj.row(k);
        v.extend((0..nodes).map(|j| r[SubsetIndex::singleton(j)]));
    }
    Trajectory::new(*traj.grid(), nodes, v, "S_singletons")
}

/// Column label of subset `mask`: the member nodes joined by `_`.
pub fn subset_label(mask: usize) -> String {
    let mut s = String::from("S");
    let mut rest = mask;
    while rest != 0 {
        let b = rest.trailing_zeros();
        rest &= rest - 1;
        s.push_str(&format!("_{b}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::math;
    use crate::network::complete_as_general;
    use crate::profit::adoption_from_survival;
    use crate::response::ResponseModel;

    fn resp(p: f64, q: f64) -> ResponseModel {
        ResponseModel::sqrt(p, 0.0, q, 0.0).unwrap()
    }

    /// `[S¹]` on two nodes with `p = q = a`:
    /// `[S¹]' = −2a[S¹] + a e^{−2at}`, so `[S¹] = e^{−2at}(1 + at)`.
    fn two_node_singleton(a: f64, t: f64) -> f64 {
        math::exp(-2.0 * a * t) * (1.0 + a * t)
    }

    #[test]
    fn two_nodes_match_symbolic_solution() {
        let net = complete_as_general(2, &resp(0.1, 0.1)).unwrap();
        let grid = TimeGrid::with_step(10.0, 0.01).unwrap();
        let tr = solve_master(&net, &PromotionPolicy::zero(grid), ControlInterp::Linear).unwrap();
        let k1 = 100;
        assert!((tr.get(k1, 2) - math::exp(-0.2)).abs() < 1e-12);
        assert!((tr.get(k1, 2) - 0.8187307530779818).abs() < 1e-12);
        for k in (0..grid.len()).step_by(50) {
            let t = grid.time(k);
            assert!((tr.get(k, 0) - two_node_singleton(0.1, t)).abs() < 1e-11);
            assert!((tr.get(k, 1) - two_node_singleton(0.1, t)).abs() < 1e-11);
        }
        let f = adoption_from_survival(&singletons(&tr, 2).unwrap(), 2).unwrap();
        let t = grid.time(700);
        assert!((f.get(700, 0) - (1.0 - two_node_singleton(0.1, t))).abs() < 1e-11);
    }

    #[test]
    fn decoupled_exponentials_without_word_of_mouth() {
        let mut net = complete_as_general(3, &resp(0.05, 0.0)).unwrap();
        net.set_node_p(2, 0.2, 0.0).unwrap();
        let grid = TimeGrid::with_step(5.0, 0.01).unwrap();
        let tr = solve_master(&net, &PromotionPolicy::zero(grid), ControlInterp::Linear).unwrap();
        let t = 5.0;
        for mask in 1..8usize {
            let p: f64 = (0..3).filter(|b| mask & (1 << b) != 0).map(|b| net.p_base()[b]).sum();
            assert!((tr.last()[mask - 1] - math::exp(-p * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn full_set_is_pure_decay() {
        let net = complete_as_general(3, &resp(0.1, 0.3)).unwrap();
        let sys = MasterSystem::new(&net).unwrap();
        let state: Vec<f64> = (0..7).map(|i| 0.9 - 0.1 * i as f64).collect();
        let mut out = vec![0.0; 7];
        sys.rhs(&state, 0.0, 0.0, &mut out);
        assert!((out[6] + 0.3 * state[6]).abs() < 1e-15);
    }

    #[test]
    fn symmetry_and_inclusion_monotonicity() {
        let r = ResponseModel::sqrt(0.01, 0.01, 0.1, 0.1).unwrap();
        let net = complete_as_general(4, &r).unwrap();
        let grid = TimeGrid::with_step(60.0, 0.1).unwrap();
        let pol = PromotionPolicy::constant(grid, 4.0, 1.0).unwrap();
        let tr = solve_master(&net, &pol, ControlInterp::Linear).unwrap();
        for k in 0..grid.len() {
            let row = tr.row(k);
            for a in 1..16usize {
                for b in 1..16usize {
                    if a.count_ones() == b.count_ones() {
                        assert!((row[a - 1] - row[b - 1]).abs() < 1e-10);
                    }
                    if a & b == a {
                        assert!(row[b - 1] <= row[a - 1] + 1e-12);
                    }
                }
            }
            if k > 0 {
                let prev = tr.row(k - 1);
                assert!(row.iter().zip(prev).all(|(x, y)| *x <= *y + 1e-12));
            }
        }
    }

    #[test]
    fn rhs_checks_dimensions() {
        let net = complete_as_general(3, &resp(0.1, 0.1)).unwrap();
        let sys = MasterSystem::new(&net).unwrap();
        let pol = PromotionPolicy::zero(TimeGrid::new(1.0, 2).unwrap());
        let mut out = vec![0.0; 7];
        assert!(master_rhs(&sys, &[1.0; 6], 0.0, &pol, &mut out).is_err());
        assert!(master_rhs(&sys, &[1.0; 7], 0.3, &pol, &mut out).is_ok());
    }

    #[test]
    fn labels() {
        assert_eq!(subset_label(0b101), "S_0_2");
    }
}
