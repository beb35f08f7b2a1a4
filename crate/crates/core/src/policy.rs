use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// How node samples of a control are read between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlInterp {
    /// Piecewise-linear between nodes (deterministic solvers).
    #[default]
    Linear,
    /// Value at the left node of each cell (Monte Carlo convention).
    LeftConstant,
}

/// Spend rates per consumer sampled at grid nodes.
///
/// A uniform promotion has one channel for `s_p` and one for `s_q`; a
/// group-targeted promotion on two equal groups carries one channel per group.
#[derive(Debug, Clone, PartialEq)]
pub struct PromotionPolicy {
    grid: TimeGrid,
    sp: Vec<Vec<f64>>,
    sq: Vec<Vec<f64>>,
}

impl PromotionPolicy {
    pub fn uniform(grid: TimeGrid, sp: Vec<f64>, sq: Vec<f64>) -> Result<Self> {
        Self::with_channels(grid, vec![sp], vec![sq])
    }

    pub fn with_channels(grid: TimeGrid, sp: Vec<Vec<f64>>, sq: Vec<Vec<f64>>) -> Result<Self> {
        if sp.is_empty() || sp.len() != sq.len() {
            return Err(Error::invalid("channels", "sp and sq need the same nonzero channel count"));
        }
        for ch in sp.iter().chain(&sq) {
            if ch.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    what: "policy samples",
                    expected: grid.len(),
                    found: ch.len(),
                });
            }
            if let Some((index, &value)) = ch.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
                return Err(Error::NegativeSpend { index, value });
            }
        }
        Ok(PromotionPolicy { grid, sp, sq })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        PromotionPolicy {
            grid,
            sp: vec![vec![0.0; grid.len()]],
            sq: vec![vec![0.0; grid.len()]],
        }
    }

    pub fn constant(grid: TimeGrid, sp: f64, sq: f64) -> Result<Self> {
        Self::uniform(grid, vec![sp; grid.len()], vec![sq; grid.len()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.sp.len()
    }

    pub fn sp(&self, channel: usize) -> &[f64] {
        &self.sp[channel]
    }

    pub fn sq(&self, channel: usize) -> &[f64] {
        &self.sq[channel]
    }

    /// Spend per consumer at node `k`: channels are averaged, since each of
    /// the `n` channels reaches `1/n` of the population.
    pub fn spend_rate(&self, k: usize) -> f64 {
        let n = self.channels() as f64;
        let sp: f64 = self.sp.iter().map(|c| c[k]).sum();
        let sq: f64 = self.sq.iter().map(|c| c[k]).sum();
        (sp + sq) / n
    }

    /// `(s_p, s_q)` of `channel` at fraction `w ∈ [0, 1]` of cell `cell`.
    #[inline]
    pub fn sample(&self, channel: usize, cell: usize, w: f64, interp: ControlInterp) -> (f64, f64) {
        let sp = &self.sp[channel];
        let sq = &self.sq[channel];
        match interp {
            ControlInterp::LeftConstant => (sp[cell], sq[cell]),
            ControlInterp::Linear => {
                if w == 0.0 {
                    (sp[cell], sq[cell])
                } else {
                    let j = cell + 1;
                    ((1.0 - w) * sp[cell] + w * sp[j], (1.0 - w) * sq[cell] + w * sq[j])
                }
            }
        }
    }

    /// Reads the policy at each node of `grid` by linear interpolation
    /// (times past the end hold the last value).
    pub fn resample(&self, grid: &TimeGrid) -> Self {
        let map = |c: &Vec<f64>| -> Vec<f64> {
            grid.times()
                .map(|t| {
                    if t >= self.grid.t_end() {
                        return c[self.grid.n_steps()];
                    }
                    let cell = self.grid.cell_of(t);
                    let w = ((t - self.grid.time(cell)) / self.grid.step()).clamp(0.0, 1.0);
                    (1.0 - w) * c[cell] + w * c[cell + 1]
                })
                .collect()
        };
        PromotionPolicy {
            grid: *grid,
            sp: self.sp.iter().map(map).collect(),
            sq: self.sq.iter().map(map).collect(),
        }
    }
}
