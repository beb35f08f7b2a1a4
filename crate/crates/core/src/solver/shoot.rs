//! Shooting on the initial costate.
//!
//! State and costate are integrated together from `t = 0`; the unknown
//! `Ψ(0)` is found by Broyden's method with a finite-difference starting
//! Jacobian and backtracking. In one dimension this is a safeguarded secant
//! iteration.

use alloc::vec;
use alloc::vec::Vec;

use super::rk4::{self, StagePoint};
use super::tail::{tail_constants, HorizonPlan};
use super::{node_controls, tail_costate, BvpOutcome, BvpProblem, SolverConfig, SHOOT_MAX_DIM};
use crate::error::{Error, Result};
use crate::math;

struct Shooter<'a, P: BvpProblem + ?Sized> {
    p: &'a P,
    plan: &'a HorizonPlan,
    target: Vec<f64>,
    buf: Vec<f64>,
}

impl<P: BvpProblem + ?Sized> Shooter<'_, P> {
    fn joint_dim(&self) -> usize {
        self.p.state_dim() + self.p.costate_dim()
    }

    /// Integrates to `t*` from `Ψ(0) = g`; returns `Ψ(t*) − target`.
    fn residual(&mut self, g: &[f64]) -> Result<Vec<f64>> {
        let p = self.p;
        let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
        let nj = nx + np;
        p.initial_state(&mut self.buf[..nx]);
        self.buf[nx..nj].copy_from_slice(g);
        let mut u = vec![0.0; nu];
        let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| {
            let (xs, ps) = y.split_at(nx);
            p.control_law(at.t, xs, ps, &mut u);
            let (dxs, dps) = dy.split_at_mut(nx);
            p.state_rhs(at.t, xs, &u, dxs);
            p.costate_rhs(at.t, xs, ps, &u, dps);
        };
        let ks = self.plan.bvp_end;
        rk4::integrate_range(&self.plan.grid, nj, &mut self.buf, None, 0, ks, &mut rhs)?;
        let end = &self.buf[ks * nj + nx..(ks + 1) * nj];
        Ok(end.iter().zip(&self.target).map(|(a, b)| a - b).collect())
    }

    fn jacobian(&mut self, g: &[f64], r: &[f64]) -> Result<Vec<f64>> {
        let n = g.len();
        let mut jac = vec![0.0; n * n];
        let mut gp = g.to_vec();
        for j in 0..n {
            let h = 1e-6 * g[j].abs().max(1.0);
            gp[j] = g[j] + h;
            let rp = self.residual(&gp)?;
            gp[j] = g[j];
            for i in 0..n {
                jac[i * n + j] = (rp[i] - r[i]) / h;
            }
        }
        Ok(jac)
    }
}

fn norm2(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

pub(crate) fn shoot<P: BvpProblem + ?Sized>(p: &P, plan: &HorizonPlan, cfg: &SolverConfig) -> Result<BvpOutcome> {
    let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
    if np > SHOOT_MAX_DIM {
        return Err(Error::UnsupportedDimension {
            dim: np,
            max: SHOOT_MAX_DIM,
        });
    }
    let econ = p.economics();
    let theta = econ.theta;
    let tol = cfg.root_tol_for(econ.gamma);
    let mut target = plan.terminal_costate(theta);
    if target.is_empty() {
        target = vec![0.0; np];
    }
    let ks = plan.bvp_end;
    let mut sh = Shooter {
        p,
        plan,
        target,
        buf: Vec::new(),
    };
    sh.buf = vec![0.0; (ks + 1) * sh.joint_dim()];

    let mut g = match &cfg.shoot_guess {
        Some(v) if v.len() == np => v.clone(),
        Some(v) => {
            return Err(Error::LengthMismatch {
                what: "shoot_guess",
                expected: np,
                found: v.len(),
            })
        }
        None => match &plan.tail {
            Some(c) => c.clone(),
            None => tail_constants(p).unwrap_or_else(|_| vec![0.0; np]),
        },
    };
    let fail = |iterations: usize, residual: f64| Error::RootFindFailed { iterations, residual };
    let mut r = sh.residual(&g).map_err(|_| fail(0, f64::INFINITY))?;
    let mut jac = sh.jacobian(&g, &r).map_err(|_| fail(0, math::sup_norm(&r)))?;
    let mut fresh = true;
    let mut iterations = 0;
    let mut history = Vec::new();
    while math::sup_norm(&r) >= tol {
        if iterations >= cfg.shoot_max_iters {
            return Err(fail(iterations, math::sup_norm(&r)));
        }
        iterations += 1;
        let mut a = jac.clone();
        let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
        if math::solve_dense(&mut a, &mut step).is_none() {
            if fresh {
                return Err(fail(iterations, math::sup_norm(&r)));
            }
            jac = sh.jacobian(&g, &r).map_err(|_| fail(iterations, math::sup_norm(&r)))?;
            fresh = true;
            continue;
        }
        let base = norm2(&r);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = g.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            if let Ok(rt) = sh.residual(&trial) {
                if norm2(&rt) < base {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((g_new, r_new)) = accepted else {
            if fresh {
                return Err(fail(iterations, math::sup_norm(&r)));
            }
            jac = sh.jacobian(&g, &r).map_err(|_| fail(iterations, math::sup_norm(&r)))?;
            fresh = true;
            continue;
        };
        // rank-one Broyden update on the accepted step
        let s: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        if ss > 0.0 {
            for i in 0..np {
                let js: f64 = (0..np).map(|j| jac[i * np + j] * s[j]).sum();
                let y = r_new[i] - r[i];
                for j in 0..np {
                    jac[i * np + j] += (y - js) * s[j] / ss;
                }
            }
        }
        fresh = false;
        g = g_new;
        r = r_new;
        history.push((math::sup_norm(&r), alpha));
    }
    let terminal_residual = math::sup_norm(&r);
    sh.residual(&g).map_err(|_| fail(iterations, terminal_residual))?;

    let grid = plan.grid;
    let n = grid.len();
    let nj = nx + np;
    let mut x = vec![0.0; n * nx];
    let mut psi = vec![0.0; n * np];
    for k in 0..=ks {
        x[k * nx..(k + 1) * nx].copy_from_slice(&sh.buf[k * nj..k * nj + nx]);
        psi[k * np..(k + 1) * np].copy_from_slice(&sh.buf[k * nj + nx..(k + 1) * nj]);
    }
    if let Some(c) = &plan.tail {
        for k in ks + 1..n {
            tail_costate(c, theta, grid.time(k), &mut psi[k * np..(k + 1) * np]);
        }
        let mut ps = vec![0.0; np];
        let mut u = vec![0.0; nu];
        let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| {
            tail_costate(c, theta, at.t, &mut ps);
            p.control_law(at.t, y, &ps, &mut u);
            p.state_rhs(at.t, y, &u, dy);
        };
        rk4::integrate_range(&grid, nx, &mut x, None, ks, grid.n_steps(), &mut rhs)?;
    }
    let mut u = vec![0.0; n * nu];
    node_controls(p, plan, &x, &psi, &mut u);
    Ok(BvpOutcome {
        state: x,
        costate: psi,
        controls: u,
        iterations,
        state_change: 0.0,
        control_change: 0.0,
        fixed_point_residual: 0.0,
        terminal_residual,
        history,
    })
}
