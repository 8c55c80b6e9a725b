//! Time integration of the rescaled (or original) equations.

mod config;
mod initial;
mod lp;
mod scheme;
mod transform;

pub use config::{Equation, InitialCondition, SolverConfig};
pub use initial::initial_density;
pub use lp::{expected_lp_slope, lp_decay_check, physical_norm};
pub use scheme::{RunOutput, SimState, Solver, StepRates, SUPPORT_FRACTION, SUPPORT_LEAK};
pub use transform::{
    inverse_similarity_transform, inverse_similarity_transform_with, similarity_transform,
    similarity_transform_with,
};
