//! The four subcommands, usable in-process as well as from the binary.

use std::path::Path;

use bassopt_core::master::solve_master;
use bassopt_core::models::complete::{solve_optimal_complete, CompleteProblem};
use bassopt_core::models::general::solve_optimal_general;
use bassopt_core::models::hetero::{solve_optimal_hetero_targeted, solve_optimal_hetero_uniform};
use bassopt_core::models::infcomplete::{corollary_report, solve_optimal_infcomplete};
use bassopt_core::models::line::{line_report, solve_optimal_line, LineProblem};
use bassopt_core::models::classify_total_spend;
use bassopt_core::solver::adoption_under_policy;
use bassopt_core::{ControlInterp, GeneralNetwork, OptimalSolution, PromotionPolicy, TimeGrid, Trajectory};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{HorizonCfg, ModelKind, PolicyChoice, RunConfig};
use crate::error::{CliError, Result};
use crate::montecarlo::{self, SimResult, ValidationReport};
use crate::network_for_simulation;
use crate::output::{self, num, write_csv, write_json};

/// Solves the optimal-control problem the config selects.
pub fn solve_model(cfg: &RunConfig) -> Result<OptimalSolution> {
    let econ = cfg.economics()?;
    let solver = cfg.solver()?;
    let sol = match cfg.model {
        ModelKind::Complete => solve_optimal_complete(cfg.nodes()?, &cfg.response()?, &econ, &solver)?,
        ModelKind::InfiniteComplete => solve_optimal_infcomplete(&cfg.response()?, &econ, &solver)?,
        ModelKind::Line => solve_optimal_line(&cfg.response()?, &econ, &solver)?,
        ModelKind::General => solve_optimal_general(&general_network(cfg)?, &econ, &solver)?,
        ModelKind::HeteroUniform => solve_optimal_hetero_uniform(&cfg.groups()?, &econ, &solver)?,
        ModelKind::HeteroTargeted => solve_optimal_hetero_targeted(&cfg.groups()?, &econ, &solver)?,
    };
    Ok(sol)
}

fn general_network(cfg: &RunConfig) -> Result<GeneralNetwork> {
    let resp = cfg.response.as_ref().map(|r| r.build("response")).transpose()?;
    cfg.network_spec()?.build(resp.as_ref())
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out.display(), e))
}

#[derive(Serialize)]
struct Residuals {
    state_change: f64,
    control_change: f64,
    fixed_point: f64,
    terminal: f64,
    stationarity: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    model: &'static str,
    pi_opt: f64,
    pi0: f64,
    delta_pi: f64,
    scenario: &'static str,
    method: &'static str,
    iterations: usize,
    residuals: Residuals,
    t_star: Option<f64>,
    t_eff: f64,
    tail_constants: &'a [f64],
    warnings: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<Value>,
    config: &'a RunConfig,
}

/// Model-specific analytic checks worth recording next to the solution.
fn model_checks(cfg: &RunConfig, sol: &OptimalSolution) -> Result<Option<Value>> {
    let econ = cfg.economics()?;
    Ok(match cfg.model {
        ModelKind::InfiniteComplete => {
            let resp = cfg.response()?;
            let r = corollary_report(sol, &resp, &econ);
            Some(json!({
                "sp0": r.sp0,
                "sq0": r.sq0,
                "sp_slope0": r.sp_slope0,
                "slope_identity_residual": r.slope_identity_residual,
                "costate_bound_violation": r.costate_bound_violation,
                "terminal_ratio": [r.terminal_ratio.0, r.terminal_ratio.1],
                "total_spend_initially_decreasing": r.total_spend_initially_decreasing,
                "holds": r.holds(&econ, 1e-4),
            }))
        }
        ModelKind::Line => {
            let r = line_report(sol, &cfg.response()?, &econ);
            Some(json!({
                "bound_violation": r.bound_violation,
                "psi2_increase": r.psi2_increase,
                "psi2_terminal": r.psi2_terminal,
            }))
        }
        _ => None,
    })
}

pub fn summary_json(cfg: &RunConfig, sol: &OptimalSolution) -> Result<Value> {
    let d = &sol.diagnostics;
    let s = Summary {
        model: cfg.model.as_str(),
        pi_opt: sol.pi_opt,
        pi0: sol.pi0,
        delta_pi: sol.delta_pi,
        scenario: classify_total_spend(&sol.total_spend()).as_str(),
        method: match d.method {
            bassopt_core::Method::Sweep => "sweep",
            bassopt_core::Method::Shooting => "shooting",
        },
        iterations: d.iterations,
        residuals: Residuals {
            state_change: d.state_change,
            control_change: d.control_change,
            fixed_point: d.fixed_point_residual,
            terminal: d.terminal_residual,
            stationarity: d.stationarity_residual,
        },
        t_star: d.t_star,
        t_eff: d.t_eff,
        tail_constants: &d.tail_constants,
        warnings: &d.warnings,
        checks: model_checks(cfg, sol)?,
        config: cfg,
    };
    serde_json::to_value(s).map_err(|e| CliError::config("<summary>", e))
}

/// Writes `solution.csv` and `summary.json`.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<OptimalSolution> {
    ensure_dir(out)?;
    let sol = solve_model(cfg)?;
    output::write_solution(&out.join("solution.csv"), &sol)?;
    write_json(&out.join("summary.json"), &summary_json(cfg, &sol)?)?;
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    #[value(name = "M")]
    M,
    #[value(name = "T")]
    T,
    #[value(name = "p0")]
    P0,
    #[value(name = "q0")]
    Q0,
    #[value(name = "bp")]
    Bp,
    #[value(name = "bq")]
    Bq,
    #[value(name = "gamma")]
    Gamma,
    #[value(name = "theta")]
    Theta,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::M => "M",
            Axis::T => "T",
            Axis::P0 => "p0",
            Axis::Q0 => "q0",
            Axis::Bp => "bp",
            Axis::Bq => "bq",
            Axis::Gamma => "gamma",
            Axis::Theta => "theta",
        }
    }

    /// Copy of `cfg` with the axis set to `v`.
    pub fn apply(self, cfg: &RunConfig, v: f64) -> Result<RunConfig> {
        let mut c = cfg.clone();
        let set_resp = |c: &mut RunConfig, f: &dyn Fn(&mut crate::config::ResponseCfg)| -> Result<()> {
            match c.model {
                ModelKind::HeteroUniform | ModelKind::HeteroTargeted => {
                    let g = c.groups.as_mut().ok_or_else(|| CliError::config("groups", "required"))?;
                    g.iter_mut().for_each(f);
                }
                _ => f(c.response.as_mut().ok_or_else(|| CliError::config("response", "required"))?),
            }
            Ok(())
        };
        match self {
            Axis::M => {
                if c.model != ModelKind::Complete {
                    return Err(CliError::config("axis", "M applies to the complete model only"));
                }
                if !(v >= 2.0 && v.fract() == 0.0) {
                    return Err(CliError::config("values", format!("M must be an integer >= 2, got {v}")));
                }
                c.nodes = Some(v as usize);
            }
            Axis::T => {
                c.economics.horizon = if v.is_infinite() { HorizonCfg::Infinite } else { HorizonCfg::Finite(v) };
            }
            Axis::Gamma => c.economics.gamma = v,
            Axis::Theta => c.economics.theta = v,
            Axis::P0 => set_resp(&mut c, &|r| r.p0 = v)?,
            Axis::Q0 => set_resp(&mut c, &|r| r.q0 = v)?,
            Axis::Bp => set_resp(&mut c, &|r| r.bp = v)?,
            Axis::Bq => set_resp(&mut c, &|r| r.bq = v)?,
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub delta_pi: f64,
    pub pi_opt: f64,
    pub pi0: f64,
    pub converged: bool,
    /// Why the row failed, if it did.
    pub error: Option<String>,
}

/// Solves once per value (concurrently) and writes `sweep.csv`. A failing
/// row is recorded and does not stop the sweep; a bad axis does.
pub fn cmd_sweep(cfg: &RunConfig, axis: Axis, values: &[f64], out: &Path) -> Result<Vec<SweepRow>> {
    ensure_dir(out)?;
    let configs = values.iter().map(|&v| axis.apply(cfg, v)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .zip(values)
        .map(|(c, &value)| match c.validate().and_then(|_| solve_model(c)) {
            Ok(sol) => SweepRow {
                value,
                delta_pi: sol.delta_pi,
                pi_opt: sol.pi_opt,
                pi0: sol.pi0,
                converged: true,
                error: None,
            },
            Err(e) => SweepRow {
                value,
                delta_pi: f64::NAN,
                pi_opt: f64::NAN,
                pi0: f64::NAN,
                converged: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let header = [axis.as_str(), "delta_pi", "pi_opt", "pi0", "converged"].map(String::from);
    let fmt_axis = |v: f64| if axis == Axis::M { format!("{}", v as usize) } else { num(v) };
    write_csv(
        &out.join("sweep.csv"),
        &header,
        rows.iter().map(|r| {
            vec![fmt_axis(r.value), num(r.delta_pi), num(r.pi_opt), num(r.pi0), r.converged.to_string()]
        }),
    )?;
    Ok(rows)
}

/// Everything a simulation needs: the network, the policy on the
/// simulation grid, and the deterministic model's prediction for it.
pub struct SimSetup {
    pub net: GeneralNetwork,
    pub policy: PromotionPolicy,
    refine: usize,
}

/// Builds the simulation inputs for `cfg`.
pub fn sim_setup(cfg: &RunConfig) -> Result<SimSetup> {
    let net = network_for_simulation(cfg)?;
    let dt_solver = cfg.solver.dt;
    let fine = match cfg.sim.policy {
        PolicyChoice::Optimal => solve_model(cfg)?.policy,
        PolicyChoice::Zero => {
            let t_end = match (cfg.sim.t_end, cfg.economics.horizon) {
                (Some(t), _) | (None, HorizonCfg::Finite(t)) => t,
                (None, HorizonCfg::Infinite) => 200.0,
            };
            PromotionPolicy::zero(TimeGrid::with_step(t_end, dt_solver)?)
        }
    };
    let t_end = cfg.sim.t_end.unwrap_or(fine.grid().t_end());
    let dt = cfg.sim.dt.unwrap_or(dt_solver);
    let cells = ((t_end / dt).round() as usize).max(1);
    let grid = TimeGrid::new(t_end, cells)?;
    let refine = ((dt / dt_solver).round() as usize).max(1);
    Ok(SimSetup {
        policy: fine.resample(&grid),
        net,
        refine,
    })
}

impl SimSetup {
    /// The deterministic adoption level under the simulated (left-constant)
    /// policy, integrated on a grid `refine` times finer and read at the
    /// simulation nodes.
    pub fn reference(&self, cfg: &RunConfig) -> Result<Trajectory> {
        let grid = *self.policy.grid();
        let r = self.refine;
        let fine = TimeGrid::new(grid.t_end(), grid.n_steps() * r)?;
        let hold = |v: &[f64]| -> Vec<f64> { (0..fine.len()).map(|i| v[(i / r).min(grid.n_steps())]).collect() };
        let held = PromotionPolicy::uniform(fine, hold(self.policy.sp(0)), hold(self.policy.sq(0)))?;
        let econ = cfg.economics()?;
        let f = match cfg.model {
            ModelKind::Complete => {
                adoption_under_policy(&CompleteProblem::new(cfg.nodes()?, cfg.response()?, econ)?, &held, ControlInterp::LeftConstant)?
            }
            ModelKind::Line => adoption_under_policy(&LineProblem::new(cfg.response()?, econ)?, &held, ControlInterp::LeftConstant)?,
            ModelKind::General => {
                let traj = solve_master(&self.net, &held, ControlInterp::LeftConstant)?;
                let sys = bassopt_core::master::MasterSystem::new(&self.net)?;
                let f: Vec<f64> = (0..fine.len()).map(|k| sys.adoption(traj.row(k))).collect();
                Trajectory::scalar(fine, f, "f")?
            }
            other => return Err(CliError::config("model", format!("{} has no finite network to simulate", other.as_str()))),
        };
        let coarse: Vec<f64> = (0..grid.len()).map(|k| f.values()[k * r]).collect();
        Ok(Trajectory::scalar(grid, coarse, "f")?)
    }
}

/// Simulates the configured policy and writes `simulation.csv`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimResult> {
    ensure_dir(out)?;
    let setup = sim_setup(cfg)?;
    let sim = montecarlo::simulate(&setup.net, &setup.policy, &cfg.sim.build()?)?;
    output::write_simulation(&out.join("simulation.csv"), &sim)?;
    Ok(sim)
}

/// Checks the deterministic model against simulation and writes
/// `validation.csv` (z-score table) and `validation.json`. `corrupt` is
/// added to the reference to exercise the failure path.
pub fn cmd_validate(cfg: &RunConfig, out: &Path, corrupt: f64) -> Result<ValidationReport> {
    ensure_dir(out)?;
    let setup = sim_setup(cfg)?;
    let mut reference = setup.reference(cfg)?.into_values();
    if corrupt != 0.0 {
        reference.iter_mut().for_each(|f| *f += corrupt);
    }
    let sim = montecarlo::simulate(&setup.net, &setup.policy, &cfg.sim.build()?)?;
    let rep = montecarlo::compare(sim, &reference);
    output::write_validation(&out.join("validation.csv"), &rep)?;
    write_json(
        &out.join("validation.json"),
        &json!({
            "pass": rep.pass,
            "max_abs_z": rep.max_abs_z,
            "frac_abs_z_over_2": rep.frac_over_warn,
            "n_runs": rep.sim.n_runs,
            "corrupt": corrupt,
            "config": cfg,
        }),
    )?;
    Ok(rep)
}
