//! Free-space Riesz potential `(-Delta)^{-s} f` on a uniform grid.

use super::kernel::{KernelTable, RieszConstant};
use crate::error::{check_order, Result};
use crate::grid::{Field, Grid1D};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Precomputed Riesz potential for one grid and order.
///
/// Holds the kernel table and the transform of the zero-padded kernel, so
/// repeated applications cost two FFTs of length `>= 2n + 3`. Immutable after
/// construction and shareable across threads.
#[derive(Clone)]
pub struct RieszOperator {
    grid: Grid1D,
    table: KernelTable,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex<f64>>,
}

impl std::fmt::Debug for RieszOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RieszOperator")
            .field("grid", &self.grid)
            .field("s", &self.table.s())
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl RieszOperator {
    pub fn new(grid: Grid1D, s: f64) -> Result<Self> {
        Self::with_constant(grid, s, RieszConstant::Standard)
    }

    pub fn with_constant(grid: Grid1D, s: f64, kind: RieszConstant) -> Result<Self> {
        check_order(s)?;
        let n = grid.n_cells();
        // offsets up to n reach the ghost cells -1 and n
        let table = KernelTable::new(s, grid.dx(), n + 1, kind)?;
        let fft_len = (2 * n + 3).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut kernel_hat = vec![Complex::new(0.0, 0.0); fft_len];
        for k in 0..=n + 1 {
            let w = table.weight(k as isize);
            kernel_hat[k].re = w;
            if k > 0 {
                kernel_hat[fft_len - k].re = w;
            }
        }
        forward.process(&mut kernel_hat);
        Ok(Self {
            grid,
            table,
            fft_len,
            forward,
            inverse,
            kernel_hat,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn s(&self) -> f64 {
        self.table.s()
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    /// Potential at the `n` cell centers.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        let ext = self.apply_extended(f)?;
        let n = self.grid.n_cells();
        Field::from_values(self.grid, ext[1..=n].to_vec())
    }

    /// Potential at cells `-1..=n`: the `n` grid cells plus one ghost cell on
    /// each side (index 0 of the result is cell `-1`).
    pub fn apply_extended(&self, f: &Field) -> Result<Vec<f64>> {
        self.grid.ensure_same(f.grid())?;
        let n = self.grid.n_cells();
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
        for (b, &v) in buf.iter_mut().zip(f.values()) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        let norm = 1.0 / self.fft_len as f64;
        let mut out = Vec::with_capacity(n + 2);
        out.push(buf[self.fft_len - 1].re * norm);
        out.extend(buf[..=n].iter().map(|c| c.re * norm));
        Ok(out)
    }

    /// O(n^2) explicit summation over the same kernel table.
    pub fn apply_direct(&self, f: &Field) -> Result<Field> {
        self.grid.ensure_same(f.grid())?;
        let n = self.grid.n_cells() as isize;
        let vals = f.values();
        let out = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.table.weight(i - j) * vals[j as usize])
                    .sum::<f64>()
            })
            .collect();
        Field::from_values(self.grid, out)
    }
}

/// `(-Delta)^{-s} f` by zero-padded FFT convolution with the cell-integrated kernel.
pub fn riesz_potential(f: &Field, s: f64) -> Result<Field> {
    RieszOperator::new(*f.grid(), s)?.apply(f)
}

/// Reference O(n^2) evaluation of [`riesz_potential`].
pub fn riesz_potential_direct(f: &Field, s: f64) -> Result<Field> {
    check_order(s)?;
    let grid = *f.grid();
    let n = grid.n_cells() as isize;
    let table = KernelTable::new(s, grid.dx(), grid.n_cells(), RieszConstant::Standard)?;
    let vals = f.values();
    let out = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| table.weight(i - j) * vals[j as usize])
                .sum::<f64>()
        })
        .collect();
    Field::from_values(grid, out)
}
