//! Cell-integrated Riesz kernel weights.

use crate::error::{check_order, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Which normalization constant multiplies `|x|^{2s-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RieszConstant {
    /// `Gamma(1/2 - s) / (2^{2s} sqrt(pi) Gamma(s))`, the constant for which
    /// the potential is the Fourier multiplier `|xi|^{-2s}`.
    #[default]
    Standard,
    /// The variant with `2^{-s}` in place of `2^{-2s}`. Kept for comparison
    /// only; it does not invert `(-Delta)^s`.
    Printed,
}

impl RieszConstant {
    pub fn value(self, s: f64) -> f64 {
        let two_pow = match self {
            RieszConstant::Standard => 2f64.powf(-2.0 * s),
            RieszConstant::Printed => 2f64.powf(-s),
        };
        two_pow * gamma(0.5 - s) / (PI.sqrt() * gamma(s))
    }
}

/// Weights `w_k = C ∫_{(k-1/2)dx}^{(k+1/2)dx} |x|^{2s-1} dx` for offsets
/// `k = 0..=max_offset` (the kernel is even, `w_{-k} = w_k`).
///
/// The singular cell `k = 0` is integrated through the antiderivative
/// `|x|^{2s}/(2s)`, so `p_i = sum_j w_{i-j} f_j` is the exact potential of the
/// piecewise-constant reconstruction evaluated at cell center `i`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    s: f64,
    dx: f64,
    constant: f64,
    weights: Vec<f64>,
}

impl KernelTable {
    pub fn new(s: f64, dx: f64, max_offset: usize, kind: RieszConstant) -> Result<Self> {
        check_order(s)?;
        let constant = kind.value(s);
        let two_s = 2.0 * s;
        let scale = constant * dx.powf(two_s) / two_s;
        let mut weights = Vec::with_capacity(max_offset + 1);
        weights.push(scale * 2.0 * 0.5f64.powf(two_s));
        for k in 1..=max_offset {
            // (k+1/2)^{2s} - (k-1/2)^{2s} without cancellation
            let lo = k as f64 - 0.5;
            let diff = lo.powf(two_s) * (two_s * (1.0 / lo).ln_1p()).exp_m1();
            weights.push(scale * diff);
        }
        Ok(Self {
            s,
            dx,
            constant,
            weights,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn max_offset(&self) -> usize {
        self.weights.len() - 1
    }

    #[inline]
    pub fn weight(&self, offset: isize) -> f64 {
        self.weights[offset.unsigned_abs()]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}
