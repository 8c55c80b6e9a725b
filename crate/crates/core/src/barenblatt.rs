//! Barenblatt steady states `rho_M(x) = k (R^2 - x^2)_+^{1-s}` of the
//! rescaled equation, their radius–mass relation and Euler–Lagrange check.

use crate::error::{check_order, Error, Result};
use crate::frac_ops::RieszOperator;
use crate::grid::{Field, Grid1D};
use crate::quadrature::gauss_legendre;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Similarity exponent `lambda = N + 2 - 2s` for `N = 1`.
#[inline]
pub fn lambda(s: f64) -> f64 {
    3.0 - 2.0 * s
}

/// `c(s)` in `M = c(s) R^{3-2s}`.
pub fn mass_coefficient(s: f64) -> f64 {
    2f64.powf(2.0 * s) * PI.sqrt() * gamma(1.5) / ((3.0 - 2.0 * s) * gamma(1.5 - s).powi(2))
}

pub fn mass_from_radius(radius: f64, s: f64) -> Result<f64> {
    check_order(s)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok(mass_coefficient(s) * radius.powf(lambda(s)))
}

pub fn radius_from_mass(mass: f64, s: f64) -> Result<f64> {
    check_order(s)?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mass must be positive, got {mass}"
        )));
    }
    Ok((mass / mass_coefficient(s)).powf(1.0 / lambda(s)))
}

/// `∫_{-1}^{1} (1 - t^2)^{1-s} dt = B(1/2, 2-s)`.
fn unit_profile_integral(s: f64) -> f64 {
    PI.sqrt() * gamma(2.0 - s) / gamma(2.5 - s)
}

/// Closed-form steady state of the rescaled pure equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarenblattProfile {
    mass: f64,
    radius: f64,
    s: f64,
    k: f64,
}

impl BarenblattProfile {
    pub fn from_mass(mass: f64, s: f64) -> Result<Self> {
        let radius = radius_from_mass(mass, s)?;
        Ok(Self::build(mass, radius, s))
    }

    pub fn from_radius(radius: f64, s: f64) -> Result<Self> {
        let mass = mass_from_radius(radius, s)?;
        Ok(Self::build(mass, radius, s))
    }

    fn build(mass: f64, radius: f64, s: f64) -> Self {
        // normalization fixed by the mass constraint
        let k = mass / (radius.powf(lambda(s)) * unit_profile_integral(s));
        Self { mass, radius, s, k }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn lambda(&self) -> f64 {
        lambda(self.s)
    }

    /// Normalization `k` in `k (R^2 - x^2)^{1-s}`.
    pub fn prefactor(&self) -> f64 {
        self.k
    }

    /// `2^{2s-1} Gamma(3/2) / (Gamma(2-s) Gamma(3/2-s))`: the prefactor
    /// obtained from `(-Delta)^{1-s} rho_M = 1` on the support. Agrees with
    /// [`prefactor`](Self::prefactor) when the mass relation holds.
    pub fn analytic_prefactor(s: f64) -> f64 {
        2f64.powf(2.0 * s - 1.0) * gamma(1.5) / (gamma(2.0 - s) * gamma(1.5 - s))
    }

    /// The prefactor with `Gamma(1 - s + N/s)` in the denominator, for
    /// comparison against [`analytic_prefactor`](Self::analytic_prefactor).
    pub fn printed_prefactor(s: f64) -> f64 {
        2f64.powf(2.0 * s - 1.0) * gamma(1.5) / (gamma(2.0 - s) * gamma(1.0 - s + 1.0 / s))
    }

    /// Right-hand side `R^2 / (2 (1 - 2s))` of the Euler–Lagrange relation.
    pub fn el_constant(&self) -> f64 {
        self.radius * self.radius / (2.0 * (1.0 - 2.0 * self.s))
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let r2 = self.radius * self.radius - x * x;
        if r2 > 0.0 {
            self.k * r2.powf(1.0 - self.s)
        } else {
            0.0
        }
    }

    /// `∫_a^b rho_M` for `0 <= a <= b <= R`, graded toward `x = R` by
    /// `x = R - (R - a) u^4`, which removes the `(R - x)^{1-s}` singularity.
    fn integral_right(&self, a: f64, b: f64) -> f64 {
        let r = self.radius;
        let span = r - a;
        if span <= 0.0 || b <= a {
            return 0.0;
        }
        let ub = ((r - b).max(0.0) / span).powf(0.25);
        let integrand = |u: f64| {
            let u3 = u * u * u;
            let x = r - span * u3 * u;
            self.evaluate(x) * 4.0 * span * u3
        };
        gauss_legendre(integrand, ub, 1.0, 2)
    }

    /// `∫_a^b rho_M` for arbitrary `a <= b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let r = self.radius;
        let a = a.clamp(-r, r);
        let b = b.clamp(-r, r);
        if b <= a {
            return 0.0;
        }
        // even profile: fold onto [0, R]
        if a >= 0.0 {
            self.integral_right(a, b)
        } else if b <= 0.0 {
            self.integral_right(-b, -a)
        } else {
            self.integral_right(0.0, b) + self.integral_right(0.0, -a)
        }
    }

    /// Cell-averaged sampling; the support must fit inside the grid.
    pub fn sample_on_grid(&self, grid: &Grid1D) -> Result<Field> {
        if self.radius >= grid.half_width() {
            return Err(Error::InvalidParameter(format!(
                "profile radius {} does not fit in half width {}",
                self.radius,
                grid.half_width()
            )));
        }
        let dx = grid.dx();
        let values = (0..grid.n_cells())
            .map(|i| self.integral(grid.face(i), grid.face(i + 1)) / dx)
            .collect();
        Field::from_values(*grid, values)
    }

    /// `(1 + lambda tau)^{-1/lambda} rho_M(y (1 + lambda tau)^{-1/lambda})`.
    pub fn rescaled(&self, tau: f64, y: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be nonnegative, got {tau}"
            )));
        }
        let l = self.lambda();
        let shrink = (1.0 + l * tau).powf(-1.0 / l);
        Ok(shrink * self.evaluate(y * shrink))
    }

    /// Evaluates the Euler–Lagrange relation on the sampled profile.
    pub fn euler_lagrange_residual(&self, grid: &Grid1D) -> Result<ElResidual> {
        let op = RieszOperator::new(*grid, self.s)?;
        self.euler_lagrange_residual_with(&op)
    }

    pub fn euler_lagrange_residual_with(&self, op: &RieszOperator) -> Result<ElResidual> {
        let grid = *op.grid();
        if self.radius > 0.5 * grid.half_width() {
            return Err(Error::InvalidParameter(format!(
                "Euler–Lagrange check needs R <= L/2 (R = {}, L = {})",
                self.radius,
                grid.half_width()
            )));
        }
        let rho = self.sample_on_grid(&grid)?;
        let p = op.apply(&rho)?;
        let c = self.el_constant();
        let mut interior_sup = 0.0f64;
        let mut exterior_min = f64::INFINITY;
        for (i, &pi) in p.values().iter().enumerate() {
            let x = grid.center(i as isize);
            let gap = pi + 0.5 * x * x - c;
            if x.abs() <= 0.9 * self.radius {
                interior_sup = interior_sup.max(gap.abs());
            } else if x.abs() > self.radius {
                exterior_min = exterior_min.min(gap);
            }
        }
        Ok(ElResidual {
            interior_sup,
            exterior_min,
        })
    }
}

/// Interior equality defect and exterior inequality margin of
/// `(-Delta)^{-s} rho_M + x^2/2` against `R^2/(2(1-2s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElResidual {
    /// `sup |gap|` over cells with `|x| <= 0.9 R`.
    pub interior_sup: f64,
    /// `min gap` over cells with `|x| > R`; nonnegative in the continuum.
    pub exterior_min: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_mass_round_trip() {
        for s in [0.05, 0.25, 0.45] {
            for r in [0.1, 1.0, 3.3] {
                let m = mass_from_radius(r, s).unwrap();
                let back = radius_from_mass(m, s).unwrap();
                assert!((back - r).abs() <= 1e-12 * r);
            }
        }
    }

    #[test]
    fn radius_monotone_and_vanishing_with_mass() {
        let rs: Vec<f64> = [1e-12, 1e-6, 0.1, 1.0, 10.0]
            .iter()
            .map(|&m| radius_from_mass(m, 0.25).unwrap())
            .collect();
        assert!(rs.windows(2).all(|w| w[0] < w[1]));
        assert!(rs[0] < 1e-3);
        assert!(radius_from_mass(0.0, 0.25).is_err());
        assert!(mass_from_radius(-1.0, 0.25).is_err());
    }

    #[test]
    fn mass_normalized_prefactor_matches_analytic() {
        for s in [0.1, 0.25, 0.4] {
            let p = BarenblattProfile::from_radius(1.7, s).unwrap();
            let k = BarenblattProfile::analytic_prefactor(s);
            assert!((p.prefactor() - k).abs() < 1e-13 * k, "s = {s}");
        }
        // the printed form differs
        let s = 0.25;
        let rel =
            BarenblattProfile::printed_prefactor(s) / BarenblattProfile::analytic_prefactor(s);
        assert!((rel - 1.0).abs() > 0.1);
    }

    #[test]
    fn evaluate_boundary_and_center() {
        let p = BarenblattProfile::from_radius(1.0, 0.25).unwrap();
        assert_eq!(p.evaluate(1.0), 0.0);
        assert_eq!(p.evaluate(-1.0), 0.0);
        assert_eq!(p.evaluate(3.0), 0.0);
        assert!((p.evaluate(0.0) - p.prefactor()).abs() < 1e-15);
        assert_eq!(p.evaluate(0.3), p.evaluate(-0.3));
    }

    #[test]
    fn el_constant_value() {
        let p = BarenblattProfile::from_radius(1.0, 0.25).unwrap();
        assert!((p.el_constant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescaled_profile() {
        let p = BarenblattProfile::from_radius(1.0, 0.25).unwrap();
        for y in [-0.5, 0.0, 0.7] {
            assert_eq!(p.rescaled(0.0, y).unwrap(), p.evaluate(y));
        }
        let sup = p.rescaled(1.0, 0.0).unwrap();
        assert!((sup - 3.5f64.powf(-0.4) * p.evaluate(0.0)).abs() < 1e-15);
        assert!(p.rescaled(-0.1, 0.0).is_err());
    }

    #[test]
    fn sampling_rejects_oversized_support() {
        let p = BarenblattProfile::from_radius(2.0, 0.25).unwrap();
        assert!(p.sample_on_grid(&Grid1D::new(1.5, 64).unwrap()).is_err());
    }

    #[test]
    fn sampling_is_zero_outside_support() {
        let p = BarenblattProfile::from_radius(1.0, 0.25).unwrap();
        let g = Grid1D::new(3.0, 300).unwrap();
        let f = p.sample_on_grid(&g).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let (a, b) = (g.face(i), g.face(i + 1));
            if b <= -1.0 || a >= 1.0 {
                assert_eq!(*v, 0.0);
            } else {
                assert!(*v > 0.0);
            }
        }
    }
}
