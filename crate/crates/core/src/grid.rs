//! Uniform cell-centered mesh on `[-L, L]` and cell-averaged fields on it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform cell-centered mesh of `n_cells` cells covering `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    n_cells: usize,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 8;

    pub fn new(half_width: f64, n_cells: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "need at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self {
            half_width,
            n_cells,
        })
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    /// Center of cell `i`; valid for ghost indices outside `0..n` as well.
    #[inline]
    pub fn center(&self, i: isize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.dx()
    }

    /// Position of face `j`, `j = 0..=n`; face `j` is the left face of cell `j`.
    #[inline]
    pub fn face(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells as isize).map(|i| self.center(i)).collect()
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.face(j)).collect()
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n_cells == other.n_cells
            && (self.half_width - other.half_width).abs() <= 1e-14 * self.half_width
    }

    pub(crate) fn ensure_same(&self, other: &Grid1D) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(L={}, n={}) vs (L={}, n={})",
                self.half_width, self.n_cells, other.half_width, other.n_cells
            )))
        }
    }
}

/// Cell-averaged density on a [`Grid1D`].
///
/// Physical states are nonnegative, but the operators also accept signed
/// fields such as differences `rho - rho_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            values: vec![0.0; grid.n_cells()],
            grid,
        }
    }

    pub fn from_values(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n_cells() as isize)
            .map(|i| f(grid.center(i)))
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.dx()
    }

    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives the sup norm.
    pub fn lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.linf();
        }
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.grid.dx()).powf(1.0 / p)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `sum_i f_i g_i dx`.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.dx())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Discrete L1 distance `sum |f_i - g_i| dx`.
    pub fn l1_distance(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.l1())
    }

    /// Mass carried by cells whose center lies outside `|x| <= radius`.
    pub fn mass_outside(&self, radius: f64) -> f64 {
        let dx = self.grid.dx();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.center(*i as isize).abs() > radius)
            .map(|(_, v)| v.abs())
            .sum::<f64>()
            * dx
    }

    /// Conservative remap of the piecewise-constant reconstruction onto
    /// `target`: each target cell receives the exact overlap integral.
    /// Mass outside `target` is dropped.
    pub fn remap_to(&self, target: &Grid1D) -> Field {
        let src = self.grid;
        let (sdx, tdx) = (src.dx(), target.dx());
        let mut out = vec![0.0; target.n_cells()];
        for (j, slot) in out.iter_mut().enumerate() {
            let (a, b) = (target.face(j), target.face(j + 1));
            let first = (((a - src.face(0)) / sdx).floor().max(0.0)) as usize;
            let mut acc = 0.0;
            let mut i = first;
            while i < src.n_cells() && src.face(i) < b {
                let lo = a.max(src.face(i));
                let hi = b.min(src.face(i + 1));
                if hi > lo {
                    acc += self.values[i] * (hi - lo);
                }
                i += 1;
            }
            *slot = acc / tdx;
        }
        Field {
            grid: *target,
            values: out,
        }
    }

    /// Largest `|x|` of a cell carrying density above `threshold`.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > threshold)
            .map(|(i, _)| self.grid.center(i as isize).abs() + 0.5 * self.grid.dx())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_quadrature_is_domain_length() {
        for &(l, n) in &[(1.0, 8), (3.7, 1000), (12.5, 4096)] {
            let g = Grid1D::new(l, n).unwrap();
            let one = Field::from_fn(g, |_| 1.0);
            assert!((one.mass() - 2.0 * l).abs() <= 1e-12 * l);
        }
    }

    #[test]
    fn centers_symmetric_for_even_n() {
        let g = Grid1D::new(2.0, 64).unwrap();
        let c = g.centers();
        for i in 0..32 {
            assert!((c[i] + c[63 - i]).abs() < 1e-14);
        }
        assert!(g.dx() > 0.0);
        assert_eq!(g.faces().len(), 65);
        assert!((g.face(64) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(0.0, 16).is_err());
        assert!(Grid1D::new(1.0, 4).is_err());
        assert!(Grid1D::new(f64::NAN, 16).is_err());
    }

    #[test]
    fn remap_conserves_mass_and_constants() {
        let a = Grid1D::new(2.0, 100).unwrap();
        let b = Grid1D::new(2.5, 77).unwrap();
        let f = Field::from_fn(a, |x| (-x * x * 3.0).exp());
        let g = f.remap_to(&b);
        assert!((g.mass() - f.mass()).abs() < 1e-13);
        let one = Field::from_fn(a, |_| 1.0).remap_to(&Grid1D::new(1.0, 33).unwrap());
        assert!(one.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Field::zeros(Grid1D::new(1.0, 16).unwrap());
        let b = Field::zeros(Grid1D::new(1.0, 32).unwrap());
        assert!(matches!(a.dot(&b), Err(Error::GridMismatch(_))));
        assert!(Field::from_values(*a.grid(), vec![0.0; 3]).is_err());
    }
}
