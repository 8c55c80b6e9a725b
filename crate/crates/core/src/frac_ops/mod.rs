//! Discrete nonlocal operators: Riesz potential, Fourier-multiplier
//! fractional Laplacian, Sobolev-type norms and the transport velocity.

mod kernel;
mod riesz;
mod spectral;
mod velocity;

pub use kernel::{KernelTable, RieszConstant};
pub use riesz::{riesz_potential, riesz_potential_direct, RieszOperator};
pub use spectral::{
    frac_laplacian, frac_laplacian_with, homog_sobolev_norm, homog_sobolev_norm_with,
    SpectralOptions,
};
pub use velocity::{velocity_field, FaceField, Frame};

use crate::error::Result;
use crate::grid::Field;

/// Relative size below which a negative quadratic form value is treated as rounding.
pub const SEMINORM_ROUNDING: f64 = 1e-12;

/// `‖(-Delta)^{-s/2} f‖_2^2 = ∫ f (-Delta)^{-s} f`.
///
/// For zero-mass signed `f` the exact value is nonnegative; tiny negative
/// results (relative to `∫ |f| |(-Delta)^{-s} f|`) are clamped to zero and logged.
pub fn neg_sobolev_seminorm_sq(f: &Field, s: f64) -> Result<f64> {
    RieszOperator::new(*f.grid(), s)?.neg_sobolev_seminorm_sq(f)
}

impl RieszOperator {
    pub fn neg_sobolev_seminorm_sq(&self, f: &Field) -> Result<f64> {
        let p = self.apply(f)?;
        let raw = f.dot(&p)?;
        if raw >= 0.0 {
            return Ok(raw);
        }
        let scale = f
            .values()
            .iter()
            .zip(p.values())
            .map(|(a, b)| (a * b).abs())
            .sum::<f64>()
            * f.grid().dx();
        if -raw <= SEMINORM_ROUNDING * scale.max(f64::MIN_POSITIVE) {
            log::debug!("clamped negative seminorm {raw:e} (scale {scale:e}) to zero");
            Ok(0.0)
        } else {
            log::warn!("negative seminorm {raw:e} beyond rounding (scale {scale:e})");
            Ok(raw)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn seminorm_of_zero_is_zero() {
        let g = Grid1D::new(2.0, 64).unwrap();
        assert_eq!(
            neg_sobolev_seminorm_sq(&Field::zeros(g), 0.25).unwrap(),
            0.0
        );
    }

    #[test]
    fn bilinear_form_is_symmetric() {
        let g = Grid1D::new(3.0, 300).unwrap();
        let f = Field::from_fn(g, |x| (-(x - 0.5f64).powi(2) * 4.0).exp());
        let h = Field::from_fn(g, |x| (1.0 - (x + 0.3f64).powi(2)).max(0.0));
        let op = RieszOperator::new(g, 0.15).unwrap();
        let a = f.dot(&op.apply(&h).unwrap()).unwrap();
        let b = h.dot(&op.apply(&f).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs());
    }
}
