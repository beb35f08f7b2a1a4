//! Effective horizon and the asymptotic costate tail for `T = ∞`.
//!
//! Near full adoption the costate system is linear,
//! `Ψ' = KΨ + b·e^{−θt}`, and its bounded solution is `Ψ = c·e^{−θt}` with
//! `(−θI − K)c = b`. For a scalar costate with `K = A`, `b = γA` this is
//! `c = −γA/(θ + A)`.

use alloc::vec;
use alloc::vec::Vec;

use super::rk4::{Direction, Rk4Work, StagePoint};
use super::{BvpProblem, SolverConfig};
use crate::economics::Horizon;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::math;

/// Grid and boundary data of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonPlan {
    pub grid: TimeGrid,
    /// Node where the costate boundary condition is imposed.
    pub bvp_end: usize,
    /// Tail constants `c`; `None` means `Ψ(t_end) = 0`.
    pub tail: Option<Vec<f64>>,
    pub t_star: Option<f64>,
    /// Infinite horizon whose uncontrolled adoption never reached the
    /// threshold before `max_horizon`.
    pub fallback: bool,
}

impl HorizonPlan {
    /// Costate imposed at `bvp_end`.
    pub fn terminal_costate(&self, theta: f64) -> Vec<f64> {
        match &self.tail {
            Some(c) => {
                let d = math::exp(-theta * self.grid.time(self.bvp_end));
                c.iter().map(|v| v * d).collect()
            }
            None => Vec::new(),
        }
    }
}

/// `c₂ = −γA/(θ + A)`.
pub fn asymptotic_tail_constant(gamma: f64, theta: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("A", "decay constant must be > 0"));
    }
    Ok(-gamma * a / (theta + a))
}

/// Tail constants of `p`, from the costate equation linearised at the
/// absorbing state with zero spend.
pub fn tail_constants<P: BvpProblem + ?Sized>(p: &P) -> Result<Vec<f64>> {
    let (nx, n) = (p.state_dim(), p.costate_dim());
    let theta = p.economics().theta;
    let mut x = vec![0.0; nx];
    p.absorbing_state(&mut x);
    let u = vec![0.0; p.control_dim()];
    let mut psi = vec![0.0; n];
    let mut b = vec![0.0; n];
    p.costate_rhs(0.0, &x, &psi, &u, &mut b);
    // a = −θI − K, column by column
    let mut a = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        psi[j] = 1.0;
        p.costate_rhs(0.0, &x, &psi, &u, &mut col);
        psi[j] = 0.0;
        for i in 0..n {
            a[i * n + j] = -(col[i] - b[i]);
        }
        a[j * n + j] -= theta;
    }
    // rows with no dynamics at all (e.g. θ = 0 and a driver that vanishes
    // at full adoption) get a zero tail
    for i in 0..n {
        let row = &mut a[i * n..(i + 1) * n];
        if b[i] == 0.0 && row.iter().all(|v| v.abs() < 1e-300) {
            row[i] = 1.0;
        }
    }
    math::solve_dense(&mut a, &mut b).ok_or_else(|| Error::invalid("tail", "asymptotic costate system is singular"))?;
    Ok(b)
}

/// Chooses the grid, the boundary node and the terminal costate.
///
/// A finite horizon gets `Ψ(T) = 0`. An infinite one runs the uncontrolled
/// dynamics until `1 − f⁰ < tail_tol` at `t*`, solves the BVP on `[0, t*]`
/// with `Ψ(t*) = c·e^{−θt*}`, and extends the grid to
/// `tail_extension · t*` where the tail costate drives the controls.
pub fn plan_horizon<P: BvpProblem + ?Sized>(p: &P, cfg: &SolverConfig) -> Result<HorizonPlan> {
    match p.economics().horizon {
        Horizon::Finite(t_end) => {
            let grid = TimeGrid::with_step(t_end, cfg.dt)?;
            Ok(HorizonPlan {
                bvp_end: grid.n_steps(),
                grid,
                tail: None,
                t_star: None,
                fallback: false,
            })
        }
        Horizon::Infinite => {
            let search = TimeGrid::with_step(cfg.max_horizon, cfg.dt)?;
            match first_below_threshold(p, &search, cfg.tail_tol)? {
                Some(k_star) => {
                    let k_star = k_star.max(1);
                    let n_eff = (math::round(cfg.tail_extension * k_star as f64) as usize).max(k_star);
                    let grid = TimeGrid::new(n_eff as f64 * search.step(), n_eff)?;
                    Ok(HorizonPlan {
                        bvp_end: k_star,
                        grid,
                        tail: Some(tail_constants(p)?),
                        t_star: Some(grid.time(k_star)),
                        fallback: false,
                    })
                }
                None => Ok(HorizonPlan {
                    bvp_end: search.n_steps(),
                    grid: search,
                    tail: None,
                    t_star: None,
                    fallback: true,
                }),
            }
        }
    }
}

/// First node of `grid` where the uncontrolled `1 − f⁰` drops below `tol`.
pub fn first_below_threshold<P: BvpProblem + ?Sized>(p: &P, grid: &TimeGrid, tol: f64) -> Result<Option<usize>> {
    let nx = p.state_dim();
    let u = vec![0.0; p.control_dim()];
    let mut x = vec![0.0; nx];
    p.initial_state(&mut x);
    if 1.0 - p.adoption(&x) < tol {
        return Ok(Some(0));
    }
    let mut work = Rk4Work::new(nx);
    let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| p.state_rhs(at.t, y, &u, dy);
    for k in 0..grid.n_steps() {
        work.step(grid, k, Direction::Forward, &mut x, &mut rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        if 1.0 - p.adoption(&x) < tol {
            return Ok(Some(k + 1));
        }
    }
    Ok(None)
}
