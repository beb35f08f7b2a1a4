use std::path::PathBuf;
use std::process::ExitCode;

use bassopt::commands::{self, Axis};
use bassopt::config::{ModelKind, RunConfig};
use bassopt::{CliError, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bassopt", version, about = "Optimal promotion strategies for the Bass model on networks")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured model.
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and simulations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Config override `dotted.key=value` (repeatable, applied in order).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the optimal-control problem; writes solution.csv and summary.json.
    Solve,
    /// Solve over a list of parameter values; writes sweep.csv.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values (`inf` allowed for T).
        #[arg(long, num_args = 0..=1, default_value = "", default_missing_value = "", allow_hyphen_values = true)]
        values: String,
    },
    /// Monte Carlo simulation of the configured policy; writes simulation.csv.
    Simulate,
    /// Compare the deterministic model with simulation; writes validation.csv
    /// and validation.json.
    Validate {
        /// Add this offset to the deterministic reference.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        corrupt: f64,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut sets = Vec::new();
    if let Some(m) = cli.model {
        sets.push(format!("model=\"{}\"", m.as_str()));
    }
    if let Some(s) = cli.seed {
        sets.push(format!("sim.seed={s}"));
    }
    sets.extend(cli.sets.iter().cloned());
    let cfg = RunConfig::load(cli.config.as_deref(), &sets)?;
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs", "must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::config("--jobs", e))?;
    let verbose = cli.verbose;

    pool.install(|| match cli.cmd {
        Cmd::Solve => {
            let sol = commands::cmd_solve(&cfg, &out)?;
            let d = &sol.diagnostics;
            if verbose {
                eprintln!(
                    "{} iterations, state change {:e}, stationarity {:e}, t_eff {}",
                    d.iterations, d.state_change, d.stationarity_residual, d.t_eff
                );
            }
            for w in &d.warnings {
                eprintln!("warning: {w}");
            }
            println!("delta_pi = {:.6}", sol.delta_pi);
            Ok(())
        }
        Cmd::Sweep { axis, values } => {
            let values = parse_values(&values)?;
            let rows = commands::cmd_sweep(&cfg, axis, &values, &out)?;
            for r in &rows {
                match &r.error {
                    Some(e) => eprintln!("{} = {}: {e}", axis.as_str(), r.value),
                    None if verbose => eprintln!("{} = {}: delta_pi {:.6}", axis.as_str(), r.value, r.delta_pi),
                    None => {}
                }
            }
            let failed = rows.iter().filter(|r| !r.converged).count();
            println!("{} rows, {} failed", rows.len(), failed);
            Ok(())
        }
        Cmd::Simulate => {
            let sim = commands::cmd_simulate(&cfg, &out)?;
            println!("{} runs, final f = {:.6}", sim.n_runs, sim.f_mean.last().copied().unwrap_or(0.0));
            Ok(())
        }
        Cmd::Validate { corrupt } => {
            let rep = commands::cmd_validate(&cfg, &out, corrupt)?;
            println!(
                "{}: max |z| = {:.3}, {:.1}% of |z| > 2",
                if rep.pass { "pass" } else { "FAIL" },
                rep.max_abs_z,
                100.0 * rep.frac_over_warn
            );
            if rep.pass {
                Ok(())
            } else {
                Err(CliError::Validation(format!("max |z| = {:.3}", rep.max_abs_z)))
            }
        }
    })
}

fn parse_values(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| CliError::config("--values", format!("{v:?}: {e}"))))
        .collect()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
