//! Damped forward-backward sweep.

use alloc::vec;
use alloc::vec::Vec;

use super::rk4::{self, Frozen, StagePoint};
use super::tail::HorizonPlan;
use super::{forward_closed_loop, node_controls, tail_costate, BvpOutcome, BvpProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::math;

/// Costate node values and slopes past `t*`, where the tail is analytic.
fn fill_tail(plan: &HorizonPlan, np: usize, theta: f64, psi: &mut [f64], dpsi: &mut [f64]) {
    if let Some(c) = &plan.tail {
        for k in plan.bvp_end..plan.grid.len() {
            let r = k * np..(k + 1) * np;
            tail_costate(c, theta, plan.grid.time(k), &mut psi[r.clone()]);
            for i in r {
                dpsi[i] = -theta * psi[i];
            }
        }
    }
}

fn backward<P: BvpProblem + ?Sized>(
    p: &P,
    plan: &HorizonPlan,
    cfg: &SolverConfig,
    x: &[f64],
    dx: &[f64],
    psi: &mut [f64],
    dpsi: &mut [f64],
) -> Result<()> {
    let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
    let grid = plan.grid;
    let theta = p.economics().theta;
    let ks = plan.bvp_end;
    let terminal = plan.terminal_costate(theta);
    let row = &mut psi[ks * np..(ks + 1) * np];
    if terminal.is_empty() {
        row.fill(0.0);
    } else {
        row.copy_from_slice(&terminal);
    }
    let frozen = Frozen {
        values: x,
        slopes: dx,
        dim: nx,
        h: grid.step(),
        interp: cfg.interp,
    };
    let mut xs = vec![0.0; nx];
    let mut u = vec![0.0; nu];
    let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| {
        frozen.read(at, &mut xs);
        p.control_law(at.t, &xs, y, &mut u);
        p.costate_rhs(at.t, &xs, y, &u, dy);
    };
    rk4::integrate_range(&grid, np, psi, Some(dpsi), ks, 0, &mut rhs)
}

pub(crate) fn sweep<P: BvpProblem + ?Sized>(p: &P, plan: &HorizonPlan, cfg: &SolverConfig) -> Result<BvpOutcome> {
    let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
    let n = plan.grid.len();
    let ks = plan.bvp_end;
    let theta = p.economics().theta;
    let mut lambda = cfg.damping;
    let lambda_min = cfg.damping / 64.0;

    let mut x = vec![0.0; n * nx];
    let mut dx = vec![0.0; n * nx];
    let mut x_prev = vec![0.0; n * nx];
    let mut psi = vec![0.0; n * np];
    let mut dpsi = vec![0.0; n * np];
    fill_tail(plan, np, theta, &mut psi, &mut dpsi);
    let mut psi_new = psi.clone();
    let mut dpsi_new = dpsi.clone();
    let mut u = vec![0.0; n * nu];
    let mut u_prev = vec![0.0; n * nu];
    let mut history: Vec<(f64, f64)> = Vec::new();

    let mut converged = false;
    let mut iterations = 0;
    let (mut ds, mut du) = (f64::INFINITY, f64::INFINITY);
    while iterations < cfg.max_iters {
        iterations += 1;
        forward_closed_loop(p, plan, &psi, &dpsi, cfg.interp, &mut x, &mut dx)?;
        backward(p, plan, cfg, &x, &dx, &mut psi_new, &mut dpsi_new)?;
        let end = ks * np;
        for i in 0..end {
            psi[i] = lambda * psi_new[i] + (1.0 - lambda) * psi[i];
            dpsi[i] = lambda * dpsi_new[i] + (1.0 - lambda) * dpsi[i];
        }
        psi[end..(ks + 1) * np].copy_from_slice(&psi_new[end..(ks + 1) * np]);
        dpsi[end..(ks + 1) * np].copy_from_slice(&dpsi_new[end..(ks + 1) * np]);
        node_controls(p, plan, &x, &psi, &mut u);
        if iterations > 1 {
            let before = ds;
            ds = math::max_abs_diff(&x, &x_prev);
            du = math::max_abs_diff(&u, &u_prev);
            history.push((ds, du));
            // a growing change signals an oscillating sweep: relax harder
            if cfg.adaptive_damping && iterations > 2 && ds > before {
                lambda = (0.5 * lambda).max(lambda_min);
            }
            if ds < cfg.tol && du < 10.0 * cfg.tol {
                converged = true;
                break;
            }
        }
        core::mem::swap(&mut x, &mut x_prev);
        core::mem::swap(&mut u, &mut u_prev);
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            residual: ds,
        });
    }

    // final state from the final costate; its distance to the last iterate
    // measures how well the pair solves the BVP
    let last = x.clone();
    forward_closed_loop(p, plan, &psi, &dpsi, cfg.interp, &mut x, &mut dx)?;
    let fixed_point = x
        .chunks(nx)
        .zip(last.chunks(nx))
        .map(|(a, b)| (p.adoption(a) - p.adoption(b)).abs())
        .fold(0.0, f64::max);
    node_controls(p, plan, &x, &psi, &mut u);
    Ok(BvpOutcome {
        state: x,
        costate: psi,
        controls: u,
        iterations,
        state_change: ds,
        control_change: du,
        fixed_point_residual: fixed_point,
        terminal_residual: 0.0,
        history,
    })
}
