//! Network specifications for every model family.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::response::{ResponseForm, ResponseModel};

/// Largest node count accepted by the exact `2^M`-state solvers.
pub const MASTER_NODE_CAP: usize = 20;

/// A finite weighted directed network with per-node response coefficients.
///
/// Node `j` adopts at rate `p_j(s_p) + Σ_k q_{k→j}(s_q) X_k`, where
/// `p_j(s) = p_base[j] + p_gain[j]·φ(s)` and
/// `q_{k→j}(s) = q_base[k][j] + q_gain[k][j]·φ(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralNetwork {
    nodes: usize,
    form: ResponseForm,
    p_base: Vec<f64>,
    p_gain: Vec<f64>,
    /// Row-major `[k * nodes + j]` = weight of `k → j`.
    q_base: Vec<f64>,
    q_gain: Vec<f64>,
}

impl GeneralNetwork {
    pub fn new(
        form: ResponseForm,
        p_base: Vec<f64>,
        p_gain: Vec<f64>,
        q_base: Vec<f64>,
        q_gain: Vec<f64>,
    ) -> Result<Self> {
        let m = p_base.len();
        if m == 0 {
            return Err(Error::invalid("nodes", "network needs at least one node"));
        }
        for (what, v, len) in [
            ("p_gain", &p_gain, m),
            ("q_base", &q_base, m * m),
            ("q_gain", &q_gain, m * m),
        ] {
            if v.len() != len {
                return Err(Error::LengthMismatch {
                    what,
                    expected: len,
                    found: v.len(),
                });
            }
        }
        for (name, v) in [("p_base", &p_base), ("p_gain", &p_gain), ("q_base", &q_base), ("q_gain", &q_gain)] {
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::invalid(name, format!("rates must be finite and >= 0, got {x}")));
            }
        }
        for j in 0..m {
            if q_base[j * m + j] != 0.0 || q_gain[j * m + j] != 0.0 {
                return Err(Error::invalid("q_base", format!("self-influence q[{j}][{j}] must be zero")));
            }
        }
        Ok(GeneralNetwork {
            nodes: m,
            form,
            p_base,
            p_gain,
            q_base,
            q_gain,
        })
    }

    /// Every node shares `resp`; edge `k → j` carries `weights[k][j]` times
    /// the internal rate.
    pub fn homogeneous(resp: &ResponseModel, nodes: usize, weights: &[f64]) -> Result<Self> {
        resp.validate()?;
        if weights.len() != nodes * nodes {
            return Err(Error::LengthMismatch {
                what: "edge weights",
                expected: nodes * nodes,
                found: weights.len(),
            });
        }
        Self::new(
            resp.form,
            vec![resp.p0; nodes],
            vec![resp.bp; nodes],
            weights.iter().map(|w| w * resp.q0).collect(),
            weights.iter().map(|w| w * resp.bq).collect(),
        )
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn form(&self) -> ResponseForm {
        self.form
    }

    pub fn p_base(&self) -> &[f64] {
        &self.p_base
    }

    pub fn p_gain(&self) -> &[f64] {
        &self.p_gain
    }

    pub fn q_base(&self) -> &[f64] {
        &self.q_base
    }

    pub fn q_gain(&self) -> &[f64] {
        &self.q_gain
    }

    /// `p_j(s_p)`.
    #[inline]
    pub fn p(&self, j: usize, sp: f64) -> f64 {
        self.p_base[j] + self.p_gain[j] * self.form.phi(sp)
    }

    /// `q_{k→j}(s_q)`.
    #[inline]
    pub fn q(&self, k: usize, j: usize, sq: f64) -> f64 {
        let i = k * self.nodes + j;
        self.q_base[i] + self.q_gain[i] * self.form.phi(sq)
    }

    /// Overrides the external-rate response of node `j`.
    pub fn set_node_p(&mut self, j: usize, base: f64, gain: f64) -> Result<()> {
        if j >= self.nodes {
            return Err(Error::invalid("node", format!("index {j} out of range")));
        }
        if !(base.is_finite() && base >= 0.0 && gain.is_finite() && gain >= 0.0) {
            return Err(Error::invalid("p_base", "rates must be finite and >= 0"));
        }
        self.p_base[j] = base;
        self.p_gain[j] = gain;
        Ok(())
    }

    /// `Σ_k q_base[k][j]`: total base internal rate into each node.
    pub fn in_rate_sums(&self) -> Vec<f64> {
        (0..self.nodes)
            .map(|j| (0..self.nodes).map(|k| self.q_base[k * self.nodes + j]).sum())
            .collect()
    }

    /// In-neighbours of `j` with a nonzero base or gain weight.
    pub fn in_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes).filter(move |&k| {
            let i = k * self.nodes + j;
            self.q_base[i] != 0.0 || self.q_gain[i] != 0.0
        })
    }

    /// Out-neighbours of `k`.
    pub fn out_neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes).filter(move |&j| {
            let i = k * self.nodes + j;
            self.q_base[i] != 0.0 || self.q_gain[i] != 0.0
        })
    }

    /// Same topology with the promotion switched off.
    pub fn unresponsive(&self) -> Self {
        GeneralNetwork {
            p_gain: vec![0.0; self.nodes],
            q_gain: vec![0.0; self.nodes * self.nodes],
            ..self.clone()
        }
    }
}

/// Homogeneous complete network: `q_{k→j} = q/(M−1)` for `k ≠ j`.
pub fn complete_as_general(nodes: usize, resp: &ResponseModel) -> Result<GeneralNetwork> {
    if nodes < 2 {
        return Err(Error::invalid("M", "complete network needs M >= 2"));
    }
    if nodes > MASTER_NODE_CAP {
        return Err(Error::NetworkTooLarge {
            nodes,
            cap: MASTER_NODE_CAP,
        });
    }
    let w = 1.0 / (nodes - 1) as f64;
    let weights: Vec<f64> = (0..nodes * nodes)
        .map(|i| if i / nodes == i % nodes { 0.0 } else { w })
        .collect();
    GeneralNetwork::homogeneous(resp, nodes, &weights)
}

/// Periodic ring of `len` nodes, each influenced by its two neighbours with
/// weight `q/2`: the finite surrogate of the infinite line.
pub fn ring_as_general(len: usize, resp: &ResponseModel) -> Result<GeneralNetwork> {
    if len < 3 {
        return Err(Error::invalid("L", "ring needs at least 3 nodes"));
    }
    let mut weights = vec![0.0; len * len];
    for j in 0..len {
        weights[((j + 1) % len) * len + j] = 0.5;
        weights[((j + len - 1) % len) * len + j] = 0.5;
    }
    GeneralNetwork::homogeneous(resp, len, &weights)
}

/// The network families with a dedicated optimal-control reduction.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkModel {
    General(GeneralNetwork),
    CompleteHomogeneous { nodes: usize },
    InfiniteComplete,
    InfiniteLine,
    HeteroCompleteTwoGroups { groups: [ResponseModel; 2] },
}

impl NetworkModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NetworkModel::General(net) => {
                if net.nodes() > MASTER_NODE_CAP {
                    return Err(Error::NetworkTooLarge {
                        nodes: net.nodes(),
                        cap: MASTER_NODE_CAP,
                    });
                }
                Ok(())
            }
            NetworkModel::CompleteHomogeneous { nodes } if *nodes < 2 => {
                Err(Error::invalid("M", "complete network needs M >= 2"))
            }
            NetworkModel::HeteroCompleteTwoGroups { groups } => {
                groups[0].validate()?;
                groups[1].validate()?;
                if groups[0].form != groups[1].form {
                    return Err(Error::invalid("groups", "both groups must share the response form"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
