//! Network description files.
//!
//! ```json
//! {"type": "complete", "M": 5, "p0": 0.01, "q0": 0.1}
//! {"type": "ring", "L": 1000}
//! {"type": "general", "p0": 0.01, "q": [[0, 0.1], [0.05, 0]]}
//! ```
//!
//! Base rates fall back to the run's `response`. For a general network `q`
//! holds the base rates `q_{k→j}` (row `k`, column `j`); each edge responds
//! to promotion in proportion to its weight, `bq_{k→j} = bq·q_{k→j}/q0`.

use std::path::Path;

use bassopt_core::network::{complete_as_general, ring_as_general};
use bassopt_core::{GeneralNetwork, ResponseForm, ResponseModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Complete,
    Ring,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(rename = "type")]
    pub kind: NetworkKind,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bq: Option<f64>,
    /// Per-node external base rates (general networks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// Dense `q_{k→j}` base rates (general networks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
}

impl NetworkSpec {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::config(format!("{}: {}", path.display(), e.path()), e.into_inner())
        })
    }

    /// Response of the nodes: the run's response with any rates given here
    /// taking precedence.
    fn response(&self, base: Option<&ResponseModel>) -> Result<ResponseModel> {
        let get = |own: Option<f64>, fallback: Option<f64>, name: &str| {
            own.or(fallback)
                .ok_or_else(|| CliError::config(format!("network.{name}"), "not given and no response to fall back on"))
        };
        let form = base.map_or(ResponseForm::Sqrt, |r| r.form);
        let bp = get(self.bp, base.map(|r| r.bp), "bp")?;
        let bq = get(self.bq, base.map(|r| r.bq), "bq")?;
        let p0 = get(self.p0, base.map(|r| r.p0), "p0")?;
        let q0 = match (self.q0, base.map(|r| r.q0), self.kind) {
            (Some(q), _, _) | (None, Some(q), _) => q,
            (None, None, NetworkKind::General) => 0.0,
            (None, None, _) => get(None, None, "q0")?,
        };
        ResponseModel::new(form, p0, bp, q0, bq).map_err(CliError::from)
    }

    pub fn build(&self, base: Option<&ResponseModel>) -> Result<GeneralNetwork> {
        let resp = self.response(base)?;
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| CliError::config(format!("network.{name}"), "required"));
        match self.kind {
            NetworkKind::Complete => Ok(complete_as_general(need(self.m, "M")?, &resp)?),
            NetworkKind::Ring => Ok(ring_as_general(need(self.l, "L")?, &resp)?),
            NetworkKind::General => self.build_general(&resp),
        }
    }

    fn build_general(&self, resp: &ResponseModel) -> Result<GeneralNetwork> {
        let q = self.q.as_ref().ok_or_else(|| CliError::config("network.q", "required for a general network"))?;
        let m = q.len();
        if m == 0 {
            return Err(CliError::config("network.q", "empty matrix"));
        }
        if let Some(given) = self.m {
            if given != m {
                return Err(CliError::config("network.M", format!("says {given} nodes but q has {m} rows")));
            }
        }
        let mut q_base = Vec::with_capacity(m * m);
        for (k, row) in q.iter().enumerate() {
            if row.len() != m {
                return Err(CliError::config(format!("network.q[{k}]"), format!("expected {m} entries, got {}", row.len())));
            }
            q_base.extend_from_slice(row);
        }
        let q_gain = if resp.bq == 0.0 {
            vec![0.0; m * m]
        } else if resp.q0 > 0.0 {
            q_base.iter().map(|w| resp.bq * w / resp.q0).collect()
        } else {
            return Err(CliError::config("network.q0", "needed to scale bq over the edges"));
        };
        let p_base = match &self.p {
            Some(p) if p.len() != m => {
                return Err(CliError::config("network.p", format!("expected {m} entries, got {}", p.len())));
            }
            Some(p) => p.clone(),
            None => vec![resp.p0; m],
        };
        Ok(GeneralNetwork::new(resp.form, p_base, vec![resp.bp; m], q_base, q_gain)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp() -> ResponseModel {
        ResponseModel::sqrt(0.01, 0.01, 0.1, 0.1).unwrap()
    }

    #[test]
    fn complete_file_matches_helper() {
        let spec: NetworkSpec = serde_json::from_str(r#"{"type": "complete", "M": 4}"#).unwrap();
        assert_eq!(spec.build(Some(&resp())).unwrap(), complete_as_general(4, &resp()).unwrap());
    }

    #[test]
    fn general_matrix_scales_gains() {
        let spec: NetworkSpec = serde_json::from_str(r#"{"type": "general", "q": [[0, 0.2], [0.05, 0]]}"#).unwrap();
        let net = spec.build(Some(&resp())).unwrap();
        assert_eq!(net.q_base(), &[0.0, 0.2, 0.05, 0.0]);
        assert!((net.q_gain()[1] - 0.2).abs() < 1e-15);
        assert!((net.q_gain()[2] - 0.05).abs() < 1e-15);
        assert_eq!(net.p_base(), &[0.01, 0.01]);
    }

    #[test]
    fn shape_errors_are_located() {
        let spec: NetworkSpec = serde_json::from_str(r#"{"type": "general", "q": [[0, 0.2], [0.05]]}"#).unwrap();
        match spec.build(Some(&resp())).unwrap_err() {
            CliError::Config { path, .. } => assert_eq!(path, "network.q[1]"),
            e => panic!("{e}"),
        }
        let spec: NetworkSpec = serde_json::from_str(r#"{"type": "ring"}"#).unwrap();
        assert!(spec.build(Some(&resp())).is_err());
    }
}
