//! Agent-based simulation of the Bass model on a finite network.
//!
//! Each node draws a unit-exponential threshold and adopts once its
//! accumulated hazard reaches it (next-reaction method). Within a grid cell
//! the promotion is held at its left-node value, so the simulation is exact
//! for that piecewise-constant policy. Thresholds are the only randomness,
//! which gives common-random-numbers monotonicity when rates increase.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use bassopt_core::{GeneralNetwork, PromotionPolicy, TimeGrid, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Runs per parallel work unit. Fixed so that the merge order, and hence
/// every output bit, does not depend on the thread count.
const CHUNK: usize = 512;

/// Validation thresholds on the per-node z-scores.
pub const MAX_ABS_Z: f64 = 4.0;
pub const Z_WARN: f64 = 2.0;
pub const MAX_FRAC_OVER_WARN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_runs: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n_runs: 10_000, seed: 1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(CliError::config("sim.n_runs", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub grid: TimeGrid,
    pub n_runs: usize,
    pub f_mean: Vec<f64>,
    pub f_stderr: Vec<f64>,
    /// Fraction of runs in which each node has adopted by the final time.
    pub node_frequency: Vec<f64>,
}

impl SimResult {
    /// Mean adoption as a trajectory on the simulation grid.
    pub fn mean_trajectory(&self) -> Trajectory {
        Trajectory::scalar(self.grid, self.f_mean.clone(), "f_mean").expect("grid-aligned by construction")
    }
}

/// Network flattened into adjacency lists for event processing.
struct Compiled {
    p_base: Vec<f64>,
    p_gain: Vec<f64>,
    out: Vec<Vec<(usize, f64, f64)>>,
}

impl Compiled {
    fn new(net: &GeneralNetwork) -> Self {
        let m = net.nodes();
        let (qb, qg) = (net.q_base(), net.q_gain());
        let out = (0..m)
            .map(|k| {
                (0..m)
                    .filter(|&j| qb[k * m + j] > 0.0 || qg[k * m + j] > 0.0)
                    .map(|j| (j, qb[k * m + j], qg[k * m + j]))
                    .collect()
            })
            .collect();
        Compiled {
            p_base: net.p_base().to_vec(),
            p_gain: net.p_gain().to_vec(),
            out,
        }
    }

    fn nodes(&self) -> usize {
        self.p_base.len()
    }
}

/// Response values `(φ(s_p), φ(s_q))` per cell, left-node convention.
fn cell_responses(net: &GeneralNetwork, policy: &PromotionPolicy) -> Result<Vec<(f64, f64)>> {
    if policy.channels() != 1 {
        return Err(CliError::config("policy", "simulation needs a single-channel (uniform) policy"));
    }
    let form = net.form();
    let (sp, sq) = (policy.sp(0), policy.sq(0));
    Ok((0..policy.grid().n_steps()).map(|k| (form.phi(sp[k]), form.phi(sq[k]))).collect())
}

#[derive(Clone, Copy)]
struct Event {
    t: f64,
    node: usize,
    version: u32,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then_with(|| other.node.cmp(&self.node))
    }
}

/// Per-run scratch buffers, reused across the runs of a chunk.
struct Run {
    threshold: Vec<f64>,
    acc: Vec<f64>,
    last: Vec<f64>,
    rate: Vec<f64>,
    infl_base: Vec<f64>,
    infl_gain: Vec<f64>,
    version: Vec<u32>,
    adopted_at: Vec<f64>,
    heap: BinaryHeap<Event>,
}

impl Run {
    fn new(m: usize) -> Self {
        Run {
            threshold: vec![0.0; m],
            acc: vec![0.0; m],
            last: vec![0.0; m],
            rate: vec![0.0; m],
            infl_base: vec![0.0; m],
            infl_gain: vec![0.0; m],
            version: vec![0; m],
            adopted_at: vec![f64::INFINITY; m],
            heap: BinaryHeap::with_capacity(m),
        }
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        for e in &mut self.threshold {
            let u: f64 = rng.random();
            *e = -(1.0 - u).ln();
        }
        self.acc.fill(0.0);
        self.last.fill(0.0);
        self.rate.fill(0.0);
        self.infl_base.fill(0.0);
        self.infl_gain.fill(0.0);
        self.version.fill(0);
        self.adopted_at.fill(f64::INFINITY);
        self.heap.clear();
    }

    /// Moves node `j` to a new constant hazard from time `t` on.
    fn retime(&mut self, net: &Compiled, j: usize, t: f64, resp: (f64, f64)) {
        self.acc[j] += self.rate[j] * (t - self.last[j]);
        self.last[j] = t;
        let r = net.p_base[j] + net.p_gain[j] * resp.0 + self.infl_base[j] + self.infl_gain[j] * resp.1;
        self.rate[j] = r;
        self.version[j] = self.version[j].wrapping_add(1);
        if r > 0.0 {
            let fire = t + ((self.threshold[j] - self.acc[j]) / r).max(0.0);
            self.heap.push(Event {
                t: fire,
                node: j,
                version: self.version[j],
            });
        }
    }

    fn simulate(&mut self, net: &Compiled, grid: &TimeGrid, resp: &[(f64, f64)]) {
        let m = net.nodes();
        for k in 0..grid.n_steps() {
            let (t0, t1) = (grid.time(k), grid.time(k + 1));
            if k == 0 || resp[k] != resp[k - 1] {
                self.heap.clear();
                for j in 0..m {
                    if self.adopted_at[j].is_infinite() {
                        self.retime(net, j, t0, resp[k]);
                    }
                }
            }
            while let Some(&ev) = self.heap.peek() {
                if ev.t >= t1 {
                    break;
                }
                self.heap.pop();
                let j = ev.node;
                if ev.version != self.version[j] || self.adopted_at[j].is_finite() {
                    continue;
                }
                self.adopted_at[j] = ev.t;
                for &(i, qb, qg) in &net.out[j] {
                    if self.adopted_at[i].is_infinite() {
                        self.infl_base[i] += qb;
                        self.infl_gain[i] += qg;
                        self.retime(net, i, ev.t, resp[k]);
                    }
                }
            }
        }
    }
}

fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Streaming mean and variance per grid node (Welford, merged with Chan's
/// pairwise formula).
#[derive(Debug, Clone)]
struct Moments {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    adopted: Vec<u64>,
}

impl Moments {
    fn new(len: usize, nodes: usize) -> Self {
        Moments {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
            adopted: vec![0; nodes],
        }
    }

    fn push(&mut self, f: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((mu, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(f) {
            let d = x - *mu;
            *mu += d / n;
            *m2 += d * (x - *mu);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        for (a, b) in self.adopted.iter_mut().zip(&other.adopted) {
            *a += b;
        }
        self.n += other.n;
    }
}

fn check_inputs(net: &GeneralNetwork, policy: &PromotionPolicy) -> Result<()> {
    let c = policy.channels();
    for ch in 0..c {
        if policy.sp(ch).iter().chain(policy.sq(ch)).any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(CliError::config("policy", "spend must be finite and >= 0"));
        }
    }
    if net.nodes() == 0 {
        return Err(CliError::config("network", "empty network"));
    }
    Ok(())
}

/// Adoption time of every node in run `run` (infinite if the node has not
/// adopted by the end of the policy grid).
pub fn adoption_times(net: &GeneralNetwork, policy: &PromotionPolicy, seed: u64, run: usize) -> Result<Vec<f64>> {
    check_inputs(net, policy)?;
    let compiled = Compiled::new(net);
    let resp = cell_responses(net, policy)?;
    let mut r = Run::new(net.nodes());
    r.reset(&mut run_rng(seed, run));
    r.simulate(&compiled, policy.grid(), &resp);
    Ok(r.adopted_at)
}

/// Monte Carlo estimate of the expected adoption level under `policy`.
pub fn simulate(net: &GeneralNetwork, policy: &PromotionPolicy, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    check_inputs(net, policy)?;
    let compiled = Compiled::new(net);
    let resp = cell_responses(net, policy)?;
    let grid = *policy.grid();
    let m = net.nodes();
    let len = grid.len();
    let n_chunks = cfg.n_runs.div_ceil(CHUNK);

    let parts: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut mom = Moments::new(len, m);
            let mut run = Run::new(m);
            let mut f = vec![0.0; len];
            let mut times = Vec::with_capacity(m);
            for r in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_runs) {
                run.reset(&mut run_rng(cfg.seed, r));
                run.simulate(&compiled, &grid, &resp);
                times.clear();
                times.extend(run.adopted_at.iter().copied().filter(|t| t.is_finite()));
                times.sort_by(f64::total_cmp);
                let mut count = 0;
                for (k, fk) in f.iter_mut().enumerate() {
                    let t = grid.time(k);
                    while count < times.len() && times[count] <= t {
                        count += 1;
                    }
                    *fk = count as f64 / m as f64;
                }
                mom.push(&f);
                for (a, t) in mom.adopted.iter_mut().zip(&run.adopted_at) {
                    *a += u64::from(t.is_finite());
                }
            }
            mom
        })
        .collect();

    let mut total = Moments::new(len, m);
    for p in &parts {
        total.merge(p);
    }
    let n = total.n as f64;
    let f_stderr = total
        .m2
        .iter()
        .map(|m2| if total.n > 1 { (m2.max(0.0) / (n - 1.0) / n).sqrt() } else { 0.0 })
        .collect();
    // the running mean can drift by an ulp; the estimate itself is monotone
    let mut f_mean = total.mean;
    for k in 1..f_mean.len() {
        f_mean[k] = f_mean[k].clamp(f_mean[k - 1], 1.0);
    }
    Ok(SimResult {
        grid,
        n_runs: cfg.n_runs,
        f_mean,
        f_stderr,
        node_frequency: total.adopted.iter().map(|&a| a as f64 / n).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub sim: SimResult,
    pub reference: Vec<f64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub frac_over_warn: f64,
    pub pass: bool,
}

/// Standard error used for scoring. When every run agrees (typically near
/// saturation) the sample error is zero and the Bernoulli bound
/// `√(r(1−r)/n)` of the reference stands in for it.
pub fn effective_stderr(stderr: f64, reference: f64, n_runs: usize) -> f64 {
    if stderr > 0.0 {
        stderr
    } else {
        let r = reference.clamp(0.0, 1.0);
        (r * (1.0 - r) / n_runs as f64).sqrt()
    }
}

/// z-score of `estimate` against `reference` given its standard error.
/// A zero standard error only tolerates a rounding-level difference.
pub fn z_score(estimate: f64, reference: f64, stderr: f64) -> f64 {
    let d = estimate - reference;
    if stderr > 0.0 {
        d / stderr
    } else if d.abs() <= 1e-12 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

/// Simulates `policy` and compares the mean adoption with `reference` node
/// by node.
pub fn validate_policy(
    net: &GeneralNetwork,
    policy: &PromotionPolicy,
    cfg: &SimConfig,
    reference: &Trajectory,
) -> Result<ValidationReport> {
    if !reference.grid().same_as(policy.grid()) || reference.dim() != 1 {
        return Err(CliError::config("reference", "must be a scalar trajectory on the policy grid"));
    }
    let sim = simulate(net, policy, cfg)?;
    Ok(compare(sim, reference.values()))
}

/// Scores a finished simulation against a reference series.
pub fn compare(sim: SimResult, reference: &[f64]) -> ValidationReport {
    let z: Vec<f64> = sim
        .f_mean
        .iter()
        .zip(&sim.f_stderr)
        .zip(reference)
        .map(|((m, se), r)| z_score(*m, *r, effective_stderr(*se, *r, sim.n_runs)))
        .collect();
    let max_abs_z = z.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    let over = z.iter().filter(|z| z.abs() > Z_WARN).count();
    let frac_over_warn = over as f64 / z.len().max(1) as f64;
    ValidationReport {
        pass: max_abs_z <= MAX_ABS_Z && frac_over_warn <= MAX_FRAC_OVER_WARN,
        reference: reference.to_vec(),
        sim,
        z,
        max_abs_z,
        frac_over_warn,
    }
}
