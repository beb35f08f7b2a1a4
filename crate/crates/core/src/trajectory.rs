use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// A vector quantity sampled at every node of a [`TimeGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
    label: String,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::LengthMismatch {
                what: "trajectory values",
                expected: grid.len() * dim,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: i / dim });
        }
        Ok(Trajectory {
            grid,
            dim,
            values,
            label: label.into(),
        })
    }

    pub fn scalar(grid: TimeGrid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(grid, 1, values, label)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.dim + i]
    }

    /// Samples of component `i` over the whole grid.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().skip(i).step_by(self.dim).copied().collect()
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.grid.n_steps())
    }
}

/// Writes `(1 − w)·a + w·b` into `out`.
#[inline]
pub(crate) fn lerp_into(a: &[f64], b: &[f64], w: f64, out: &mut [f64]) {
    if w == 0.0 {
        out.copy_from_slice(a);
    } else if w == 1.0 {
        out.copy_from_slice(b);
    } else {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = (1.0 - w) * x + w * y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn length_and_finiteness_checked() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        assert!(Trajectory::new(g, 2, vec![0.0; 6], "x").is_ok());
        assert!(matches!(
            Trajectory::new(g, 2, vec![0.0; 5], "x"),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Trajectory::new(g, 1, vec![0.0, f64::NAN, 1.0], "x"),
            Err(Error::NonFinite { step: 1 })
        ));
    }

    #[test]
    fn component_extraction() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        let t = Trajectory::new(g, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], "x").unwrap();
        assert_eq!(t.component(1), vec![2.0, 4.0, 6.0]);
        assert_eq!(t.row(1), &[3.0, 4.0]);
        assert_eq!(t.last(), &[5.0, 6.0]);
    }
}
