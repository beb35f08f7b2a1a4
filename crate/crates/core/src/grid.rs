use crate::error::{Error, Result};
use crate::math;

/// Uniform time grid `t_k = k·h`, `k = 0..=n_steps`, on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::invalid("t_end", "must be finite and > 0"));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be positive"));
        }
        let grid = TimeGrid { t_end, n_steps };
        if !(grid.step() > 0.0 && grid.step().is_finite()) {
            return Err(Error::invalid("n_steps", "step size underflows"));
        }
        Ok(grid)
    }

    /// Grid on `[0, t_end]` whose step is as close to `dt` as possible without exceeding it.
    pub fn with_step(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        let n = math::ceil(t_end / dt - 1e-9).max(1.0);
        Self::new(t_end, n as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Index of the cell `[t_k, t_{k+1})` containing `t` (clamped to the grid).
    pub fn cell_of(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let k = (t / self.step()) as usize;
        k.min(self.n_steps - 1)
    }

    /// Two grids are interchangeable if their node times coincide.
    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n_steps == other.n_steps
            && (self.t_end - other.t_end).abs() <= 1e-12 * self.t_end.max(1.0)
    }
}
