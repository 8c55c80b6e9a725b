//! Entropy functional, its dissipation, relative entropy against Barenblatt
//! profiles, the regularized variants, quadratic Wasserstein distance and
//! the inequality checks tying them together.

use crate::barenblatt::BarenblattProfile;
use crate::error::{Error, Result};
use crate::frac_ops::{Frame, RieszOperator};
use crate::grid::Field;
use serde::{Deserialize, Serialize};

/// Negative densities above `-NEGATIVE_TOLERANCE * max(1, ‖rho‖_inf)` are treated as rounding.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Relative mass agreement required before comparing against a profile.
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Density floor below which cells are skipped in logarithmic terms:
/// `1e-14 * M / (2L)`.
pub fn log_floor(rho: &Field) -> f64 {
    1e-14 * rho.mass().abs() / (2.0 * rho.grid().half_width())
}

fn check_nonnegative(rho: &Field) -> Result<()> {
    let tol = NEGATIVE_TOLERANCE * rho.linf().max(1.0);
    match rho
        .values()
        .iter()
        .enumerate()
        .find(|(_, &v)| v < -tol || v.is_nan())
    {
        Some((cell, &value)) => Err(Error::NegativeDensity { cell, value }),
        None => Ok(()),
    }
}

fn check_mass(a: f64, b: f64) -> Result<()> {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= MASS_TOLERANCE * scale {
        Ok(())
    } else {
        Err(Error::MassMismatch {
            left: a,
            right: b,
            tol: MASS_TOLERANCE,
        })
    }
}

/// Entropy-type functionals sharing one precomputed Riesz operator.
#[derive(Debug, Clone)]
pub struct EntropyEvaluator {
    op: RieszOperator,
}

impl EntropyEvaluator {
    pub fn new(op: RieszOperator) -> Self {
        Self { op }
    }

    pub fn operator(&self) -> &RieszOperator {
        &self.op
    }

    /// `H[rho] = 1/2 ∫ rho (-Delta)^{-s} rho + 1/2 ∫ x^2 rho`.
    pub fn entropy(&self, rho: &Field) -> Result<f64> {
        check_nonnegative(rho)?;
        let p = self.op.apply(rho)?;
        Ok(0.5 * rho.dot(&p)? + 0.5 * moment_unchecked(rho, 2))
    }

    /// `I[rho] = ∫ rho |d/dx (-Delta)^{-s} rho + x|^2`, face velocities averaged to centers.
    pub fn dissipation(&self, rho: &Field) -> Result<f64> {
        check_nonnegative(rho)?;
        let v = self.op.velocity(rho, Frame::Similarity)?.to_centers();
        Ok(rho
            .values()
            .iter()
            .zip(v.values())
            .map(|(r, u)| r * u * u)
            .sum::<f64>()
            * rho.grid().dx())
    }

    pub fn relative_entropy(&self, rho: &Field, profile: &BarenblattProfile) -> Result<f64> {
        check_mass(rho.mass(), profile.mass())?;
        let reference = profile.sample_on_grid(rho.grid())?;
        Ok(self.entropy(rho)? - self.entropy(&reference)?)
    }

    /// `H[rho] + eps ∫ rho log rho`; cells at or below [`log_floor`] contribute 0.
    pub fn regularized_entropy(&self, rho: &Field, epsilon: f64) -> Result<f64> {
        let h = self.entropy(rho)?;
        if epsilon == 0.0 {
            return Ok(h);
        }
        Ok(h + epsilon * rho_log_rho(rho, log_floor(rho)))
    }

    pub fn regularized_dissipation(&self, rho: &Field, epsilon: f64) -> Result<f64> {
        self.regularized_dissipation_with_floor(rho, epsilon, log_floor(rho))
    }

    /// `∫ rho |d/dx (-Delta)^{-s} rho + x + eps d/dx log rho|^2`; the log
    /// gradient uses centered differences and is dropped on cells at or
    /// below `floor`.
    pub fn regularized_dissipation_with_floor(
        &self,
        rho: &Field,
        epsilon: f64,
        floor: f64,
    ) -> Result<f64> {
        if epsilon == 0.0 {
            return self.dissipation(rho);
        }
        check_nonnegative(rho)?;
        let v = self.op.velocity(rho, Frame::Similarity)?.to_centers();
        let vals = rho.values();
        let n = vals.len();
        let dx = rho.grid().dx();
        let mut total = 0.0;
        for i in 0..n {
            let r = vals[i];
            // the centered velocity is -(grad p + x)
            let mut w = -v.values()[i];
            if r > floor {
                let left = if i > 0 { vals[i - 1] } else { 0.0 };
                let right = if i + 1 < n { vals[i + 1] } else { 0.0 };
                w += epsilon * (right - left) / (2.0 * dx) / r;
            }
            total += r * w * w;
        }
        Ok(total * dx)
    }

    /// `1/2 I[rho] - H[rho | rho_M]`, nonnegative in the continuum for `s < 1/2`.
    pub fn check_entropy_dissipation(
        &self,
        rho: &Field,
        profile: &BarenblattProfile,
    ) -> Result<f64> {
        Ok(0.5 * self.dissipation(rho)? - self.relative_entropy(rho, profile)?)
    }
}

fn evaluator(rho: &Field, s: f64) -> Result<EntropyEvaluator> {
    Ok(EntropyEvaluator::new(RieszOperator::new(*rho.grid(), s)?))
}

pub fn entropy(rho: &Field, s: f64) -> Result<f64> {
    evaluator(rho, s)?.entropy(rho)
}

pub fn dissipation(rho: &Field, s: f64) -> Result<f64> {
    evaluator(rho, s)?.dissipation(rho)
}

/// `H[rho] - H[rho_M]` with the profile sampled on the same grid.
pub fn relative_entropy(rho: &Field, profile: &BarenblattProfile) -> Result<f64> {
    evaluator(rho, profile.s())?.relative_entropy(rho, profile)
}

pub fn regularized_entropy(rho: &Field, s: f64, epsilon: f64) -> Result<f64> {
    evaluator(rho, s)?.regularized_entropy(rho, epsilon)
}

pub fn regularized_dissipation(rho: &Field, s: f64, epsilon: f64) -> Result<f64> {
    evaluator(rho, s)?.regularized_dissipation(rho, epsilon)
}

pub fn check_entropy_dissipation(rho: &Field, profile: &BarenblattProfile, s: f64) -> Result<f64> {
    evaluator(rho, s)?.check_entropy_dissipation(rho, profile)
}

/// `∫ rho log rho` over cells above `floor`.
pub fn rho_log_rho(rho: &Field, floor: f64) -> f64 {
    rho.values()
        .iter()
        .filter(|&&r| r > floor)
        .map(|&r| r * r.ln())
        .sum::<f64>()
        * rho.grid().dx()
}

fn moment_unchecked(rho: &Field, order: i32) -> f64 {
    let g = rho.grid();
    rho.values()
        .iter()
        .enumerate()
        .map(|(i, r)| g.center(i as isize).powi(order) * r)
        .sum::<f64>()
        * g.dx()
}

/// `∑ x_i^order rho_i dx` for even `order >= 2`.
pub fn moment(rho: &Field, order: u32) -> Result<f64> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "only even positive moments are tracked, got order {order}"
        )));
    }
    Ok(moment_unchecked(rho, order as i32))
}

/// Mass-carrying segments of a piecewise-linear CDF: cell `i` maps the mass
/// interval `[m, m + c_i]` linearly onto `[face_i, face_{i+1}]`.
fn quantile_segments(rho: &Field) -> Vec<(f64, f64, f64, f64)> {
    let g = rho.grid();
    let dx = g.dx();
    let mut m = 0.0;
    let mut segs = Vec::new();
    for (i, &r) in rho.values().iter().enumerate() {
        let c = r.max(0.0) * dx;
        if c > 0.0 {
            segs.push((m, m + c, g.face(i), g.face(i + 1)));
            m += c;
        }
    }
    segs
}

#[inline]
fn quantile_at(seg: &(f64, f64, f64, f64), m: f64) -> f64 {
    let (m0, m1, x0, x1) = *seg;
    x0 + (x1 - x0) * ((m - m0) / (m1 - m0)).clamp(0.0, 1.0)
}

/// `W_2` between equal-mass densities via the quantile coupling of their
/// piecewise-linear cumulative distributions, integrated exactly.
pub fn wasserstein2(rho1: &Field, rho2: &Field) -> Result<f64> {
    check_nonnegative(rho1)?;
    check_nonnegative(rho2)?;
    check_mass(rho1.mass(), rho2.mass())?;
    let a = quantile_segments(rho1);
    let b = quantile_segments(rho2);
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let total = a.last().unwrap().1.min(b.last().unwrap().1);
    let (mut i, mut j) = (0usize, 0usize);
    let mut m = 0.0;
    let mut acc = 0.0;
    while m < total && i < a.len() && j < b.len() {
        let next = a[i].1.min(b[j].1).min(total);
        if next > m {
            let d0 = quantile_at(&a[i], m) - quantile_at(&b[j], m);
            let d1 = quantile_at(&a[i], next) - quantile_at(&b[j], next);
            // exact for the linear difference on [m, next]
            acc += (next - m) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
            m = next;
        }
        if a[i].1 <= m {
            i += 1;
        }
        if j < b.len() && b[j].1 <= m {
            j += 1;
        }
    }
    Ok(acc.max(0.0).sqrt())
}

/// One diagnostics row; field names are the CSV column names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub tau: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "H_rel")]
    pub h_rel: f64,
    pub hneg_s_sq: f64,
    pub w2: f64,
    pub m2: f64,
    pub m2n: f64,
    pub min_density: f64,
    pub support_radius: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 15] = [
        "t",
        "tau",
        "mass",
        "l1",
        "l2",
        "linf",
        "H",
        "I",
        "H_rel",
        "hneg_s_sq",
        "w2",
        "m2",
        "m2n",
        "min_density",
        "support_radius",
    ];

    /// Margins of the three inequalities (nonnegative when satisfied):
    /// `1/2 I - H_rel`, `2 H_rel - hneg_s_sq`, `2 H_rel - w2^2`.
    pub fn inequality_margins(&self) -> [f64; 3] {
        [
            0.5 * self.i - self.h_rel,
            2.0 * self.h_rel - self.hneg_s_sq,
            2.0 * self.h_rel - self.w2 * self.w2,
        ]
    }
}

/// Builds [`DiagnosticsRecord`]s in similarity variables.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    eval: EntropyEvaluator,
    s: f64,
    moment_order: u32,
}

impl Diagnostics {
    pub fn new(op: RieszOperator, moment_order: u32) -> Result<Self> {
        if moment_order < 2 || !moment_order.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "moment order must be even and >= 2, got {moment_order}"
            )));
        }
        let s = op.s();
        Ok(Self {
            eval: EntropyEvaluator::new(op),
            s,
            moment_order,
        })
    }

    pub fn evaluator(&self) -> &EntropyEvaluator {
        &self.eval
    }

    /// Evaluates every column; the comparison profile is fitted to the
    /// current mass of `rho`.
    pub fn record(&self, rho: &Field, t: f64, tau: f64) -> Result<DiagnosticsRecord> {
        let mass = rho.mass();
        let profile = BarenblattProfile::from_mass(mass, self.s)?;
        let reference = profile.sample_on_grid(rho.grid())?;
        let h = self.eval.entropy(rho)?;
        let h_ref = self.eval.entropy(&reference)?;
        let diff = rho.sub(&reference)?;
        Ok(DiagnosticsRecord {
            t,
            tau,
            mass,
            l1: rho.l1(),
            l2: rho.l2(),
            linf: rho.linf(),
            h,
            i: self.eval.dissipation(rho)?,
            h_rel: h - h_ref,
            hneg_s_sq: self.eval.operator().neg_sobolev_seminorm_sq(&diff)?,
            w2: wasserstein2(rho, &reference)?,
            m2: moment_unchecked(rho, 2),
            m2n: moment_unchecked(rho, self.moment_order as i32),
            min_density: rho.min(),
            support_radius: rho.support_radius(log_floor(rho)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn grid() -> Grid1D {
        Grid1D::new(4.0, 400).unwrap()
    }

    #[test]
    fn zero_density_has_zero_entropy_and_dissipation() {
        let z = Field::zeros(grid());
        assert_eq!(entropy(&z, 0.25).unwrap(), 0.0);
        assert_eq!(dissipation(&z, 0.25).unwrap(), 0.0);
        assert_eq!(moment(&z, 2).unwrap(), 0.0);
    }

    #[test]
    fn negative_density_rejected() {
        let mut f = Field::from_fn(grid(), |x| (-x * x).exp());
        f.values_mut()[10] = -1e-3;
        assert!(matches!(
            entropy(&f, 0.25),
            Err(Error::NegativeDensity { cell: 10, .. })
        ));
    }

    #[test]
    fn odd_moment_rejected() {
        let f = Field::from_fn(grid(), |x| (-x * x).exp());
        assert!(moment(&f, 3).is_err());
        assert!(moment(&f, 0).is_err());
        assert!(moment(&f, 4).unwrap() > 0.0);
    }

    #[test]
    fn epsilon_zero_reduces_to_plain_functionals() {
        let f = Field::from_fn(grid(), |x| (-(x - 0.2f64).powi(2) * 3.0).exp());
        let e = evaluator(&f, 0.3).unwrap();
        assert_eq!(
            e.regularized_entropy(&f, 0.0).unwrap(),
            e.entropy(&f).unwrap()
        );
        assert_eq!(
            e.regularized_dissipation(&f, 0.0).unwrap(),
            e.dissipation(&f).unwrap()
        );
    }

    #[test]
    fn regularized_entropy_is_affine_in_epsilon() {
        let f = Field::from_fn(grid(), |x| (-(x - 0.2f64).powi(2) * 3.0).exp());
        let e = evaluator(&f, 0.3).unwrap();
        let h0 = e.entropy(&f).unwrap();
        let a = e.regularized_entropy(&f, 1e-2).unwrap() - h0;
        let b = e.regularized_entropy(&f, 2e-2).unwrap() - h0;
        assert!((b - 2.0 * a).abs() < 1e-12 * b.abs());
    }

    #[test]
    fn relative_entropy_rejects_mass_mismatch() {
        let p = BarenblattProfile::from_mass(1.0, 0.25).unwrap();
        let f = p.sample_on_grid(&grid()).unwrap().scaled(1.01);
        assert!(matches!(
            relative_entropy(&f, &p),
            Err(Error::MassMismatch { .. })
        ));
    }

    #[test]
    fn relative_entropy_of_profile_is_zero() {
        let p = BarenblattProfile::from_mass(1.0, 0.25).unwrap();
        let f = p.sample_on_grid(&grid()).unwrap();
        assert_eq!(relative_entropy(&f, &p).unwrap(), 0.0);
        let margin = check_entropy_dissipation(&f, &p, 0.25).unwrap();
        assert!(margin.abs() < 1e-3, "{margin}");
    }

    #[test]
    fn wasserstein_identity_and_translation() {
        let g = grid();
        let f = Field::from_fn(g, |x| (-(x + 0.5f64).powi(2) * 5.0).exp());
        assert_eq!(wasserstein2(&f, &f).unwrap(), 0.0);
        let shift = 37usize;
        let mut vals = vec![0.0; g.n_cells()];
        vals[shift..].copy_from_slice(&f.values()[..g.n_cells() - shift]);
        let moved = Field::from_values(g, vals).unwrap();
        let h = shift as f64 * g.dx();
        let w = wasserstein2(&f, &moved).unwrap();
        assert!((w - h * f.mass().sqrt()).abs() < 1e-12, "{w}");
    }

    #[test]
    fn wasserstein_rejects_mass_mismatch() {
        let f = Field::from_fn(grid(), |x| (-x * x).exp());
        assert!(wasserstein2(&f, &f.scaled(2.0)).is_err());
    }

    #[test]
    fn dissipation_positive_off_equilibrium() {
        let f = Field::from_fn(grid(), |x| (-(x - 1.0f64).powi(2) * 10.0).exp());
        let e = evaluator(&f, 0.25).unwrap();
        assert!(e.dissipation(&f).unwrap() > 0.0);
        assert!(e.regularized_dissipation(&f, 1e-2).unwrap() > 0.0);
    }
}
