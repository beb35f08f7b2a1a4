//! Two-point boundary-value machinery shared by every model.
//!
//! A model describes its Pontryagin system through [`BvpProblem`]: state and
//! costate right-hand sides plus the current-value marginal worth of each
//! control. The closed-form control law and the Hamiltonian are derived from
//! those pieces, and [`solve`] runs the horizon plan, the chosen BVP method
//! and the profit bookkeeping.

pub mod rk4;
mod shoot;
mod sweep;
pub mod tail;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::economics::Economics;
use crate::error::{Error, Result};
use crate::policy::PromotionPolicy;
use crate::profit::{delta_pi, profit};
use crate::response::ResponseForm;
use crate::solution::{Diagnostics, OptimalSolution};
use crate::trajectory::Trajectory;

pub use rk4::{rk4_integrate, Direction, FrozenInterp, StagePoint};
pub use tail::{asymptotic_tail_constant, plan_horizon, tail_constants, HorizonPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Damped forward-backward sweep.
    #[default]
    Sweep,
    /// Root-finding on the initial costate.
    Shooting,
}

/// Largest costate dimension the shooting method accepts.
pub const SHOOT_MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Time step of the integration grid.
    pub dt: f64,
    /// Sup-norm threshold on successive state iterates; controls use `10·tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Weight of the new costate in the damped update, in `(0, 1]`.
    pub damping: f64,
    /// Halve the damping (down to `damping/64`) whenever the state change
    /// grows between sweeps.
    pub adaptive_damping: bool,
    /// Threshold on `1 − f⁰` that fixes `t*` for an infinite horizon.
    pub tail_tol: f64,
    /// Shooting terminal residual; defaults to `1e−8·γ`.
    pub root_tol: Option<f64>,
    /// Effective horizon as a multiple of `t*`.
    pub tail_extension: f64,
    /// Give up looking for `t*` past this time.
    pub max_horizon: f64,
    /// Reading of frozen trajectories at RK4 half steps.
    pub interp: FrozenInterp,
    /// Initial costate guess for shooting; defaults to the tail constants.
    pub shoot_guess: Option<Vec<f64>>,
    pub shoot_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Sweep,
            dt: 0.05,
            tol: 1e-8,
            max_iters: 500,
            damping: 0.5,
            adaptive_damping: true,
            tail_tol: 1e-4,
            root_tol: None,
            tail_extension: 2.0,
            max_horizon: 5000.0,
            interp: FrozenInterp::Hermite,
            shoot_guess: None,
            shoot_max_iters: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("tol", self.tol),
            ("tail_tol", self.tail_tol),
            ("max_horizon", self.max_horizon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping", "must lie in (0, 1]"));
        }
        if !(self.tail_extension.is_finite() && self.tail_extension >= 1.0) {
            return Err(Error::invalid("tail_extension", "must be >= 1"));
        }
        if let Some(r) = self.root_tol {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::invalid("root_tol", "must be finite and > 0"));
            }
        }
        if self.max_iters == 0 || self.shoot_max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be >= 1"));
        }
        Ok(())
    }

    pub fn root_tol_for(&self, gamma: f64) -> f64 {
        self.root_tol.unwrap_or(1e-8 * gamma)
    }
}

/// A Pontryagin boundary-value problem.
///
/// Controls are laid out as `[s_p per channel…, s_q per channel…]`. Every
/// control enters through `rate = base + b·φ(s)` with the shared response
/// form, so stationarity reads `w·φ'(s) = cost` where `w` is the
/// current-value marginal worth returned by [`BvpProblem::worth`].
pub trait BvpProblem {
    fn economics(&self) -> &Economics;
    fn form(&self) -> ResponseForm;
    fn state_dim(&self) -> usize;
    fn costate_dim(&self) -> usize;

    fn channels(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        2 * self.channels()
    }

    /// Weight of control `i` in the spend per consumer.
    fn control_cost(&self, _i: usize) -> f64 {
        1.0
    }

    fn initial_state(&self, x: &mut [f64]);

    /// The state the uncontrolled dynamics settle in (full adoption).
    fn absorbing_state(&self, x: &mut [f64]);

    fn state_rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]);

    fn costate_rhs(&self, t: f64, x: &[f64], psi: &[f64], u: &[f64], dpsi: &mut [f64]);

    /// `∂H/∂φ(s_i) · e^{θt}` for every control.
    fn worth(&self, t: f64, x: &[f64], psi: &[f64], w: &mut [f64]);

    /// Expected adoption level of a state.
    fn adoption(&self, x: &[f64]) -> f64;

    /// `df/dt` from a state derivative.
    fn adoption_rate(&self, dx: &[f64]) -> f64;

    fn state_labels(&self) -> Vec<String>;

    fn costate_labels(&self) -> Vec<String>;

    /// Closed-form maximiser of the Hamiltonian, written into `u`.
    fn control_law(&self, t: f64, x: &[f64], psi: &[f64], u: &mut [f64]) {
        self.worth(t, x, psi, u);
        let form = self.form();
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = form.best_response(*ui, self.control_cost(i));
        }
    }

    /// Spend per consumer of a control vector.
    fn spend(&self, u: &[f64]) -> f64 {
        u.iter().enumerate().map(|(i, s)| self.control_cost(i) * s).sum()
    }

    /// `H = e^{−θt}(γ df/dt − spend) + Ψ·dx/dt`.
    fn hamiltonian(&self, t: f64, x: &[f64], psi: &[f64], u: &[f64]) -> f64 {
        let mut dx = vec![0.0; self.state_dim()];
        self.state_rhs(t, x, u, &mut dx);
        let econ = self.economics();
        let running = econ.discount(t) * (econ.gamma * self.adoption_rate(&dx) - self.spend(u));
        running + psi.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `∂H/∂s_i = e^{−θt}(w_i φ'(s_i) − cost_i)`; `+∞` flags an active
    /// boundary of the square-root form.
    fn hamiltonian_gradient(&self, t: f64, x: &[f64], psi: &[f64], u: &[f64], out: &mut [f64]) {
        self.worth(t, x, psi, out);
        let form = self.form();
        let disc = self.economics().discount(t);
        for (i, g) in out.iter_mut().enumerate() {
            let w = *g;
            let d = form.dphi(u[i]);
            *g = if d.is_infinite() {
                if w > 0.0 {
                    f64::INFINITY
                } else {
                    -disc * self.control_cost(i)
                }
            } else {
                disc * (w * d - self.control_cost(i))
            };
        }
    }
}

/// Node buffers produced by a BVP method on the plan grid.
pub(crate) struct BvpOutcome {
    pub(crate) state: Vec<f64>,
    pub(crate) costate: Vec<f64>,
    pub(crate) controls: Vec<f64>,
    pub(crate) iterations: usize,
    pub(crate) state_change: f64,
    pub(crate) control_change: f64,
    pub(crate) fixed_point_residual: f64,
    pub(crate) terminal_residual: f64,
    pub(crate) history: Vec<(f64, f64)>,
}

/// Costate `c·e^{−θt}` of the asymptotic tail.
#[inline]
pub(crate) fn tail_costate(c: &[f64], theta: f64, t: f64, out: &mut [f64]) {
    let d = crate::math::exp(-theta * t);
    for (o, ci) in out.iter_mut().zip(c) {
        *o = ci * d;
    }
}

/// Forward pass with the costate frozen: inside `[0, t*]` it is read from the
/// node buffers, past `t*` from the analytic tail.
#[allow(clippy::too_many_arguments)]
pub(crate) fn forward_closed_loop<P: BvpProblem + ?Sized>(
    p: &P,
    plan: &HorizonPlan,
    psi: &[f64],
    dpsi: &[f64],
    interp: FrozenInterp,
    x: &mut [f64],
    dx: &mut [f64],
) -> Result<()> {
    let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
    let grid = plan.grid;
    let theta = p.economics().theta;
    let frozen = rk4::Frozen {
        values: psi,
        slopes: dpsi,
        dim: np,
        h: grid.step(),
        interp,
    };
    let mut ps = vec![0.0; np];
    let mut u = vec![0.0; nu];
    let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| {
        match &plan.tail {
            Some(c) if at.cell >= plan.bvp_end => tail_costate(c, theta, at.t, &mut ps),
            _ => frozen.read(at, &mut ps),
        }
        p.control_law(at.t, y, &ps, &mut u);
        p.state_rhs(at.t, y, &u, dy);
    };
    p.initial_state(&mut x[..nx]);
    rk4::integrate_range(&grid, nx, x, Some(dx), 0, grid.n_steps(), &mut rhs)
}

/// Forward pass under a fixed control vector.
pub(crate) fn forward_open_loop<P: BvpProblem + ?Sized>(p: &P, grid: &crate::grid::TimeGrid, u: &[f64]) -> Result<Vec<f64>> {
    let nx = p.state_dim();
    let mut x = vec![0.0; grid.len() * nx];
    p.initial_state(&mut x[..nx]);
    let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| p.state_rhs(at.t, y, u, dy);
    rk4::integrate_range(grid, nx, &mut x, None, 0, grid.n_steps(), &mut rhs)?;
    Ok(x)
}

/// Control law evaluated at every node.
pub(crate) fn node_controls<P: BvpProblem + ?Sized>(p: &P, plan: &HorizonPlan, x: &[f64], psi: &[f64], u: &mut [f64]) {
    let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
    for k in 0..plan.grid.len() {
        let t = plan.grid.time(k);
        p.control_law(t, &x[k * nx..(k + 1) * nx], &psi[k * np..(k + 1) * np], &mut u[k * nu..(k + 1) * nu]);
    }
}

fn adoption_series<P: BvpProblem + ?Sized>(p: &P, x: &[f64]) -> Vec<f64> {
    x.chunks(p.state_dim()).map(|r| p.adoption(r).clamp(0.0, 1.0)).collect()
}

/// Builds node buffers of a policy into a [`PromotionPolicy`].
pub(crate) fn policy_from_controls<P: BvpProblem + ?Sized>(
    p: &P,
    grid: crate::grid::TimeGrid,
    u: &[f64],
) -> Result<PromotionPolicy> {
    let nu = p.control_dim();
    let c = p.channels();
    let col = |i: usize| -> Vec<f64> { u.chunks(nu).map(|r| r[i].max(0.0)).collect() };
    let sp = (0..c).map(col).collect();
    let sq = (c..2 * c).map(col).collect();
    PromotionPolicy::with_channels(grid, sp, sq)
}

/// Solves the optimal promotion problem `p` and evaluates its profit against
/// the no-promotion baseline.
pub fn solve<P: BvpProblem + ?Sized>(p: &P, cfg: &SolverConfig) -> Result<OptimalSolution> {
    cfg.validate()?;
    p.economics().validate()?;
    let plan = plan_horizon(p, cfg)?;
    let out = match cfg.method {
        Method::Sweep => sweep::sweep(p, &plan, cfg)?,
        Method::Shooting => shoot::shoot(p, &plan, cfg)?,
    };
    finish(p, &plan, cfg, out)
}

fn finish<P: BvpProblem + ?Sized>(p: &P, plan: &HorizonPlan, cfg: &SolverConfig, out: BvpOutcome) -> Result<OptimalSolution> {
    let grid = plan.grid;
    let econ = p.economics();
    let (nx, np, nu) = (p.state_dim(), p.costate_dim(), p.control_dim());
    let zero = vec![0.0; nu];
    let x0 = forward_open_loop(p, &grid, &zero)?;

    let policy = policy_from_controls(p, grid, &out.controls)?;
    let f_opt = Trajectory::scalar(grid, adoption_series(p, &out.state), "f_opt")?;
    let f0 = Trajectory::scalar(grid, adoption_series(p, &x0), "f0")?;
    let pi_opt = profit(&policy, &f_opt, econ)?;
    let pi0 = profit(&PromotionPolicy::zero(grid), &f0, econ)?;
    let dpi = delta_pi(pi_opt, pi0)?;

    let mut grad = vec![0.0; nu];
    let mut stationarity: f64 = 0.0;
    let form = p.form();
    for k in 0..grid.len() {
        let t = grid.time(k);
        let (xs, ps, us) = (&out.state[k * nx..(k + 1) * nx], &out.costate[k * np..(k + 1) * np], &out.controls[k * nu..(k + 1) * nu]);
        p.worth(t, xs, ps, &mut grad);
        for i in 0..nu {
            let r = form.stationarity_residual(grad[i], p.control_cost(i), us[i]);
            stationarity = stationarity.max(econ.discount(t) * r);
        }
    }

    let mut warnings = Vec::new();
    if plan.fallback {
        warnings.push(String::from(
            "uncontrolled adoption never reached the tail threshold; zero terminal costate used at max_horizon",
        ));
    }
    let diagnostics = Diagnostics {
        method: cfg.method,
        iterations: out.iterations,
        state_change: out.state_change,
        control_change: out.control_change,
        fixed_point_residual: out.fixed_point_residual,
        terminal_residual: out.terminal_residual,
        stationarity_residual: stationarity,
        t_star: plan.t_star,
        t_eff: grid.t_end(),
        tail_constants: plan.tail.clone().unwrap_or_default(),
        history: out.history,
        warnings,
    };
    Ok(OptimalSolution {
        policy,
        state: Trajectory::new(grid, nx, out.state, "state")?,
        costate: Trajectory::new(grid, np, out.costate, "costate")?,
        baseline_state: Trajectory::new(grid, nx, x0, "state0")?,
        state_labels: p.state_labels(),
        costate_labels: p.costate_labels(),
        adoption: f_opt,
        baseline_adoption: f0,
        pi_opt,
        pi0,
        delta_pi: dpi,
        diagnostics,
    })
}

/// State trajectory of `p` under a fixed policy, read between nodes with
/// `interp`.
pub fn forward_policy<P: BvpProblem + ?Sized>(p: &P, policy: &PromotionPolicy, interp: crate::policy::ControlInterp) -> Result<Trajectory> {
    let c = p.channels();
    if policy.channels() != c {
        return Err(Error::LengthMismatch {
            what: "policy channels",
            expected: c,
            found: policy.channels(),
        });
    }
    let grid = *policy.grid();
    let nx = p.state_dim();
    let mut x = vec![0.0; grid.len() * nx];
    p.initial_state(&mut x[..nx]);
    let mut u = vec![0.0; 2 * c];
    let mut rhs = |at: StagePoint, y: &[f64], dy: &mut [f64]| {
        for ch in 0..c {
            let (sp, sq) = policy.sample(ch, at.cell, at.weight, interp);
            u[ch] = sp;
            u[c + ch] = sq;
        }
        p.state_rhs(at.t, y, &u, dy);
    };
    rk4::integrate_range(&grid, nx, &mut x, None, 0, grid.n_steps(), &mut rhs)?;
    Trajectory::new(grid, nx, x, "state")
}

/// Adoption level of `p` under a fixed policy.
pub fn adoption_under_policy<P: BvpProblem + ?Sized>(p: &P, policy: &PromotionPolicy, interp: crate::policy::ControlInterp) -> Result<Trajectory> {
    let x = forward_policy(p, policy, interp)?;
    let f = adoption_series(p, x.values());
    Trajectory::scalar(*policy.grid(), f, "f")
}
