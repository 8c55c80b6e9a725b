//! Fourier-multiplier fractional Laplacian and homogeneous Sobolev norms.
//!
//! Fields are zero-padded to `pad * n` points (rounded up to a power of two)
//! and treated as periodic on the padded domain. This is only accurate for
//! fields that are numerically supported well inside the grid.

use crate::error::{Error, Result};
use crate::grid::Field;
use num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralOptions {
    /// Padding factor, at least 4.
    pub pad: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { pad: 8 }
    }
}

impl SpectralOptions {
    pub const MIN_PAD: usize = 4;

    fn validate(&self) -> Result<()> {
        if self.pad < Self::MIN_PAD {
            return Err(Error::InvalidParameter(format!(
                "pad factor {} below {}",
                self.pad,
                Self::MIN_PAD
            )));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn padded_len(n: usize, pad: usize) -> usize {
    (n * pad).next_power_of_two()
}

/// Angular wavenumber of DFT index `k` on a periodic domain of `len` points.
pub(crate) fn wavenumber(k: usize, len: usize, dx: f64) -> f64 {
    let signed = if k <= len / 2 {
        k as f64
    } else {
        k as f64 - len as f64
    };
    2.0 * PI * signed / (len as f64 * dx)
}

fn padded_spectrum(f: &Field, len: usize) -> Vec<Complex<f64>> {
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for (b, &v) in buf.iter_mut().zip(f.values()) {
        b.re = v;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf
}

/// `(-Delta)^{alpha/2} f` as the multiplier `|xi|^alpha`; the mean mode maps to 0.
pub fn frac_laplacian(f: &Field, alpha: f64) -> Result<Field> {
    frac_laplacian_with(f, alpha, SpectralOptions::default())
}

pub fn frac_laplacian_with(f: &Field, alpha: f64, opts: SpectralOptions) -> Result<Field> {
    check_alpha(alpha)?;
    opts.validate()?;
    let n = f.len();
    let dx = f.grid().dx();
    let len = padded_len(n, opts.pad);
    let mut buf = padded_spectrum(f, len);
    for (k, b) in buf.iter_mut().enumerate() {
        *b *= wavenumber(k, len, dx).abs().powf(alpha);
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let norm = 1.0 / len as f64;
    Field::from_values(*f.grid(), buf[..n].iter().map(|c| c.re * norm).collect())
}

/// `(sum |xi|^alpha |f_hat|^2 dxi)^{1/2}`, normalized so that its square equals
/// `∫ f (-Delta)^{alpha/2} f` as computed by [`frac_laplacian`].
pub fn homog_sobolev_norm(f: &Field, alpha: f64) -> Result<f64> {
    homog_sobolev_norm_with(f, alpha, SpectralOptions::default())
}

pub fn homog_sobolev_norm_with(f: &Field, alpha: f64, opts: SpectralOptions) -> Result<f64> {
    check_alpha(alpha)?;
    opts.validate()?;
    let dx = f.grid().dx();
    let len = padded_len(f.len(), opts.pad);
    let spec = padded_spectrum(f, len);
    let sum: f64 = spec
        .iter()
        .enumerate()
        .map(|(k, c)| wavenumber(k, len, dx).abs().powf(alpha) * c.norm_sqr())
        .sum();
    Ok((sum * dx / len as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid1D::new(4.0, 128).unwrap();
        let z = Field::zeros(g);
        assert!(frac_laplacian(&z, 0.7)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert_eq!(homog_sobolev_norm(&z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_two_is_second_difference_laplacian() {
        // -f'' via the multiplier against the three-point stencil, O(dx^2)
        let errs: Vec<f64> = [256usize, 512]
            .iter()
            .map(|&n| {
                let g = Grid1D::new(6.0, n).unwrap();
                let f = Field::from_fn(g, |x| (-x * x).exp() * (1.0 + 0.5 * (2.0 * x).sin()));
                let spec = frac_laplacian(&f, 2.0).unwrap();
                let dx = g.dx();
                let v = f.values();
                (2..n - 2)
                    .map(|i| {
                        let fd = -(v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
                        (fd - spec.values()[i]).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 1e-2, "{errs:?}");
        assert!(errs[1] < errs[0] / 3.5, "{errs:?}");
    }

    #[test]
    fn norm_is_homogeneous() {
        let g = Grid1D::new(5.0, 256).unwrap();
        let f = Field::from_fn(g, |x| (-(x - 0.3f64).powi(2)).exp());
        let a = homog_sobolev_norm(&f, 1.3).unwrap();
        let b = homog_sobolev_norm(&f.scaled(-2.5), 1.3).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn norm_squared_is_quadratic_form() {
        let g = Grid1D::new(5.0, 256).unwrap();
        let f = Field::from_fn(g, |x| (-(x + 0.4f64).powi(2) * 2.0).exp());
        let n = homog_sobolev_norm(&f, 0.8).unwrap();
        let q = f.dot(&frac_laplacian(&f, 0.8).unwrap()).unwrap();
        assert!((n * n - q).abs() < 1e-12 * q);
    }

    #[test]
    fn rejects_bad_alpha_and_pad() {
        let g = Grid1D::new(5.0, 64).unwrap();
        let f = Field::zeros(g);
        assert!(frac_laplacian(&f, 0.0).is_err());
        assert!(frac_laplacian(&f, 2.5).is_err());
        assert!(homog_sobolev_norm(&f, -1.0).is_err());
        assert!(frac_laplacian_with(&f, 1.0, SpectralOptions { pad: 2 }).is_err());
    }
}
