//! Similarity variables `x = y P^{-1/lambda}`, `t = log(P)/lambda`,
//! `rho = P^{1/lambda} u` with `P = 1 + lambda tau` (one space dimension).
//!
//! The map acts on cell-averaged fields by rescaling the grid and the
//! values together, so it is exact and mass preserving.

use crate::barenblatt::lambda;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};

/// Maps `u(y, tau)` to `(rho(x, t), t)` for fractional order `s`.
pub fn similarity_transform(u: &Field, tau: f64, s: f64) -> Result<(Field, f64)> {
    similarity_transform_with(u, tau, lambda(s))
}

/// Maps `(rho(x, t), t)` back to `(u(y, tau), tau)` for fractional order `s`.
pub fn inverse_similarity_transform(rho: &Field, t: f64, s: f64) -> Result<(Field, f64)> {
    inverse_similarity_transform_with(rho, t, lambda(s))
}

pub fn similarity_transform_with(u: &Field, tau: f64, lambda: f64) -> Result<(Field, f64)> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be nonnegative, got {tau}"
        )));
    }
    let p = 1.0 + lambda * tau;
    let shrink = p.powf(-1.0 / lambda);
    let grid = Grid1D::new(u.grid().half_width() * shrink, u.grid().n_cells())?;
    let rho = Field::from_values(grid, u.values().iter().map(|v| v / shrink).collect())?;
    Ok((rho, p.ln() / lambda))
}

/// Inverse of [`similarity_transform_with`]: `(rho(x, t), t) -> (u(y, tau), tau)`.
pub fn inverse_similarity_transform_with(rho: &Field, t: f64, lambda: f64) -> Result<(Field, f64)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t must be nonnegative, got {t}"
        )));
    }
    let stretch = t.exp(); // P^{1/lambda} = e^t
    let grid = Grid1D::new(rho.grid().half_width() * stretch, rho.grid().n_cells())?;
    let u = Field::from_values(grid, rho.values().iter().map(|v| v / stretch).collect())?;
    Ok((u, (lambda * t).exp_m1() / lambda))
}
