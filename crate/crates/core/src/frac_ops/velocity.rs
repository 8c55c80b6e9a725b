use super::riesz::RieszOperator;
use crate::error::Result;
use crate::grid::{Field, Grid1D};
use serde::{Deserialize, Serialize};

/// Reference frame of the transport equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Rescaled variables with the confining drift `+x`.
    #[default]
    Similarity,
    /// Original variables, no confinement.
    Physical,
}

/// Values at the `n + 1` cell faces; face `j` sits at `grid.face(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl FaceField {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Average of the two faces of each cell.
    pub fn to_centers(&self) -> Field {
        let vals = self
            .values
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect();
        Field::from_values(self.grid, vals).expect("n + 1 faces give n cells")
    }
}

impl RieszOperator {
    /// Transport velocity `-(d/dx (-Delta)^{-s} rho + x)` (similarity) or
    /// `-d/dx (-Delta)^{-s} rho` (physical) at the cell faces.
    ///
    /// The potential is differentiated by centered differences across each
    /// face; the two boundary faces use the potential at the ghost cells.
    pub fn velocity(&self, rho: &Field, frame: Frame) -> Result<FaceField> {
        let p = self.apply_extended(rho)?;
        let grid = *self.grid();
        let dx = grid.dx();
        let values = (0..=grid.n_cells())
            .map(|j| {
                let grad = (p[j + 1] - p[j]) / dx;
                match frame {
                    Frame::Similarity => -(grad + grid.face(j)),
                    Frame::Physical => -grad,
                }
            })
            .collect();
        Ok(FaceField { grid, values })
    }
}

pub fn velocity_field(rho: &Field, s: f64, frame: Frame) -> Result<FaceField> {
    RieszOperator::new(*rho.grid(), s)?.velocity(rho, frame)
}
