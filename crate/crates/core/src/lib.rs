//! Simulation and entropy diagnostics for the one-dimensional nonlocal porous
//! medium equation `u_t = (u (d/dx) (-Delta)^{-s} u)_x` with absorption or convection,
//! in similarity variables where solutions relax to Barenblatt profiles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barenblatt;
pub mod entropy;
pub mod error;
pub mod frac_ops;
pub mod grid;
pub mod harness;
pub mod integrated;
mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Field, Grid1D};
