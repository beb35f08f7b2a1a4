//! Classical fixed-step fourth-order Runge–Kutta on a [`TimeGrid`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::trajectory::Trajectory;

/// Where an RK4 stage sits: time `t`, grid cell `[t_cell, t_cell+1]`, and the
/// fraction `weight` of the cell elapsed at `t`.
///
/// Frozen inputs sampled at grid nodes are read at `(cell, weight)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagePoint {
    pub t: f64,
    pub cell: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Scratch buffers for one RK4 step.
pub(crate) struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    pub(crate) fn new(dim: usize) -> Self {
        Rk4Work {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `y` from node `k` to `k+1` (forward) or `k−1` (backward).
    /// The slope at the starting node is left in `first_slope()`.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn step<F>(&mut self, grid: &TimeGrid, k: usize, dir: Direction, y: &mut [f64], rhs: &mut F)
    where
        F: FnMut(StagePoint, &[f64], &mut [f64]),
    {
        let (h, cell, w0, w1) = match dir {
            Direction::Forward => (grid.step(), k, 0.0, 1.0),
            Direction::Backward => (-grid.step(), k - 1, 1.0, 0.0),
        };
        let t0 = grid.time(k);
        let t1 = match dir {
            Direction::Forward => grid.time(k + 1),
            Direction::Backward => grid.time(k - 1),
        };
        let tm = t0 + 0.5 * h;
        let n = y.len();
        rhs(StagePoint { t: t0, cell, weight: w0 }, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        rhs(StagePoint { t: tm, cell, weight: 0.5 }, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        rhs(StagePoint { t: tm, cell, weight: 0.5 }, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        rhs(StagePoint { t: t1, cell, weight: w1 }, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }

    pub(crate) fn first_slope(&self) -> &[f64] {
        &self.k1
    }
}

/// Integrates between nodes `from` and `to` of `grid`, in place on the
/// row-major node buffer `values` (`dim` values per node). Row `from` must
/// hold the initial value.
///
/// When `slopes` is given, the right-hand side at each visited node is
/// written to it in the same layout (the node `to` gets one extra call).
pub(crate) fn integrate_range<F>(
    grid: &TimeGrid,
    dim: usize,
    values: &mut [f64],
    mut slopes: Option<&mut [f64]>,
    from: usize,
    to: usize,
    rhs: &mut F,
) -> Result<()>
where
    F: FnMut(StagePoint, &[f64], &mut [f64]),
{
    let mut work = Rk4Work::new(dim);
    let mut y = values[from * dim..(from + 1) * dim].to_vec();
    let dir = if to >= from { Direction::Forward } else { Direction::Backward };
    let mut k = from;
    while k != to {
        work.step(grid, k, dir, &mut y, rhs);
        if let Some(s) = slopes.as_deref_mut() {
            s[k * dim..(k + 1) * dim].copy_from_slice(work.first_slope());
        }
        k = match dir {
            Direction::Forward => k + 1,
            Direction::Backward => k - 1,
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k });
        }
        values[k * dim..(k + 1) * dim].copy_from_slice(&y);
    }
    if let Some(s) = slopes {
        let (cell, weight) = match dir {
            Direction::Forward if to > 0 => (to - 1, 1.0),
            _ => (to, 0.0),
        };
        rhs(
            StagePoint {
                t: grid.time(to),
                cell,
                weight,
            },
            &y,
            &mut s[to * dim..(to + 1) * dim],
        );
    }
    Ok(())
}

/// Integrates `y' = rhs(t, y)` over the whole grid.
///
/// `Forward` starts from `y0` at `t = 0`; `Backward` starts from `y0` at
/// `t_end` and fills the trajectory from the end.
pub fn rk4_integrate<F>(mut rhs: F, y0: &[f64], grid: &TimeGrid, direction: Direction) -> Result<Trajectory>
where
    F: FnMut(StagePoint, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut values = vec![0.0; grid.len() * dim];
    let (from, to) = match direction {
        Direction::Forward => (0, grid.n_steps()),
        Direction::Backward => (grid.n_steps(), 0),
    };
    values[from * dim..(from + 1) * dim].copy_from_slice(y0);
    integrate_range(grid, dim, &mut values, None, from, to, &mut rhs)?;
    Trajectory::new(*grid, dim, values, "y")
}

/// How a frozen trajectory is read at an RK4 stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrozenInterp {
    /// Straight line between the two nodes of the cell.
    Linear,
    /// Cubic Hermite through the node values and node slopes; keeps the
    /// fourth-order accuracy of the integrator.
    #[default]
    Hermite,
}

/// A trajectory held fixed while another one is integrated.
#[derive(Clone, Copy)]
pub(crate) struct Frozen<'a> {
    pub(crate) values: &'a [f64],
    pub(crate) slopes: &'a [f64],
    pub(crate) dim: usize,
    pub(crate) h: f64,
    pub(crate) interp: FrozenInterp,
}

impl Frozen<'_> {
    pub(crate) fn read(&self, at: StagePoint, out: &mut [f64]) {
        let d = self.dim;
        let c = at.cell;
        let w = at.weight;
        if w == 0.0 {
            out.copy_from_slice(&self.values[c * d..(c + 1) * d]);
            return;
        }
        if w == 1.0 {
            out.copy_from_slice(&self.values[(c + 1) * d..(c + 2) * d]);
            return;
        }
        let y0 = &self.values[c * d..(c + 1) * d];
        let y1 = &self.values[(c + 1) * d..(c + 2) * d];
        match self.interp {
            FrozenInterp::Linear => crate::trajectory::lerp_into(y0, y1, w, out),
            FrozenInterp::Hermite => {
                let s0 = &self.slopes[c * d..(c + 1) * d];
                let s1 = &self.slopes[(c + 1) * d..(c + 2) * d];
                let w2 = w * w;
                let w3 = w2 * w;
                let h00 = 2.0 * w3 - 3.0 * w2 + 1.0;
                let h10 = (w3 - 2.0 * w2 + w) * self.h;
                let h01 = -2.0 * w3 + 3.0 * w2;
                let h11 = (w3 - w2) * self.h;
                for i in 0..d {
                    out[i] = h00 * y0[i] + h10 * s0[i] + h01 * y1[i] + h11 * s1[i];
                }
            }
        }
    }
}
