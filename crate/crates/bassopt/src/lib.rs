//! File formats, Monte Carlo validation and the command-line front end for
//! `bassopt-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod netfile;
pub mod output;

use bassopt_core::network::ring_as_general;
use bassopt_core::GeneralNetwork;

use config::{ModelKind, RunConfig};
pub use error::{CliError, Result};

/// The finite network a model is simulated on: the complete network itself,
/// the general network, or a ring standing in for the infinite line.
pub fn network_for_simulation(cfg: &RunConfig) -> Result<GeneralNetwork> {
    match cfg.model {
        ModelKind::Complete => {
            let m = cfg.nodes()?;
            let w = 1.0 / (m - 1) as f64;
            let weights: Vec<f64> = (0..m * m).map(|i| if i / m == i % m { 0.0 } else { w }).collect();
            Ok(GeneralNetwork::homogeneous(&cfg.response()?, m, &weights)?)
        }
        ModelKind::General => {
            let resp = cfg.response.as_ref().map(|r| r.build("response")).transpose()?;
            cfg.network_spec()?.build(resp.as_ref())
        }
        ModelKind::Line => Ok(ring_as_general(cfg.sim.ring_length, &cfg.response()?)?),
        other => Err(CliError::config(
            "model",
            format!("{} has no finite network to simulate", other.as_str()),
        )),
    }
}
