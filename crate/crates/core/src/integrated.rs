//! Cumulative-mass formulation of the convection equation in one dimension,
//!
//! `v_tau + |v_x| (-Delta)^{1-s} v + b |v_x|^q = 0`, `v(-inf) = 0`, `v(+inf) = M0`,
//!
//! discretized by a monotone explicit scheme: Godunov numerical Hamiltonian
//! in `v_x` and a nonnegative-weight stencil for the nonlocal operator.

use crate::entropy::{Diagnostics, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::frac_ops::{Frame, KernelTable, RieszConstant, RieszOperator};
use crate::grid::{Field, Grid1D};
use crate::solver::{
    initial_density, similarity_transform, Equation, RunOutput, SimState, SolverConfig,
};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Relative slack allowed on node ordering before an update counts as a
/// loss of monotonicity.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Cumulative mass `v` at the faces of `grid` (`n + 1` nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedState {
    pub grid: Grid1D,
    pub v: Vec<f64>,
    pub m0: f64,
    /// physical time `tau`
    pub t: f64,
}

impl IntegratedState {
    /// Checks monotonicity and the pinned boundary values.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n_cells();
        if self.v.len() != n + 1 {
            return Err(Error::GridMismatch(format!(
                "expected {} nodes, got {}",
                n + 1,
                self.v.len()
            )));
        }
        let tol = 1e-8 * self.m0;
        if self.v[0].abs() > tol || (self.v[n] - self.m0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "boundary values {} and {} do not match 0 and {}",
                self.v[0], self.v[n], self.m0
            )));
        }
        for j in 1..=n {
            if self.v[j] < self.v[j - 1] - MONOTONE_SLACK * self.m0 {
                return Err(Error::MonotonicityLoss {
                    node: j,
                    left: self.v[j - 1],
                    right: self.v[j],
                });
            }
        }
        Ok(())
    }
}

/// Cumulative cell sums: `v_0 = 0`, `v_{j+1} = v_j + dx u_j`.
pub fn integrate_density(u: &Field) -> IntegratedState {
    let dx = u.grid().dx();
    let mut v = Vec::with_capacity(u.len() + 1);
    let mut acc = 0.0;
    v.push(0.0);
    for &x in u.values() {
        acc += dx * x;
        v.push(acc);
    }
    IntegratedState {
        grid: *u.grid(),
        m0: acc,
        v,
        t: 0.0,
    }
}

/// Cell densities `(v_{i+1} - v_i) / dx`, clamped at 0.
pub fn differentiate_cdf(state: &IntegratedState) -> Field {
    let dx = state.grid.dx();
    let vals = state
        .v
        .windows(2)
        .map(|w| ((w[1] - w[0]) / dx).max(0.0))
        .collect();
    Field::from_values(state.grid, vals).expect("n + 1 nodes give n cells")
}

/// `(-Delta)^{1-s}` on face nodes with `v` extended by `0` on the left and
/// `M0` on the right:
///
/// `(L v)_j = sum_{m != 0} omega_m (v_j - v_{j+m})`,
/// `omega_m = (w_{m-1} - 2 w_m + w_{m+1}) / dx^2 >= 0`,
///
/// where `w` is the cell-integrated Riesz kernel. Sums over the constant
/// extensions telescope to `(w_{K-1} - w_K) / dx^2`.
#[derive(Clone)]
pub struct NonlocalStencil {
    grid: Grid1D,
    /// `w_0 .. w_{n+2}`
    w: Vec<f64>,
    /// `omega_0 .. omega_{n}` with `omega_0 = 0`
    omega: Vec<f64>,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    omega_hat: Vec<Complex<f64>>,
}

impl std::fmt::Debug for NonlocalStencil {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlocalStencil")
            .field("grid", &self.grid)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl NonlocalStencil {
    pub fn new(grid: Grid1D, s: f64) -> Result<Self> {
        let n = grid.n_cells();
        let dx = grid.dx();
        let table = KernelTable::new(s, dx, n + 2, RieszConstant::Standard)?;
        let w = table.weights().to_vec();
        let inv_dx2 = 1.0 / (dx * dx);
        let omega: Vec<f64> = std::iter::once(0.0)
            .chain(
                w.windows(3)
                    .take(n)
                    .map(|t| (t[0] - 2.0 * t[1] + t[2]) * inv_dx2),
            )
            .collect();
        // linear convolution of n + 1 nodes with offsets -n..n
        let fft_len = (3 * n + 3).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut omega_hat = vec![Complex::new(0.0, 0.0); fft_len];
        for m in 1..=n {
            omega_hat[m] = Complex::new(omega[m], 0.0);
            omega_hat[fft_len - m] = Complex::new(omega[m], 0.0);
        }
        forward.process(&mut omega_hat);
        Ok(Self {
            grid,
            w,
            omega,
            fft_len,
            forward,
            inverse,
            omega_hat,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Stencil weights `omega_m`, `m = 0..=n` (`omega_0 = 0`).
    pub fn weights(&self) -> &[f64] {
        &self.omega
    }

    /// Total off-diagonal weight `sum_{m != 0} omega_m = 2 (w_0 - w_1) / dx^2`.
    pub fn diagonal(&self) -> f64 {
        let dx = self.grid.dx();
        2.0 * (self.w[0] - self.w[1]) / (dx * dx)
    }

    /// Weight of all offsets `m >= k` (`k >= 1`).
    fn tail(&self, k: usize) -> f64 {
        let dx = self.grid.dx();
        (self.w[k - 1] - self.w[k]) / (dx * dx)
    }

    /// Applies the operator to node values `v` with right boundary value `m0`.
    pub fn apply(&self, v: &[f64], m0: f64) -> Result<Vec<f64>> {
        let n = self.grid.n_cells();
        if v.len() != n + 1 {
            return Err(Error::GridMismatch(format!(
                "expected {} nodes, got {}",
                n + 1,
                v.len()
            )));
        }
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
        for (b, &x) in buf.iter_mut().zip(v) {
            *b = Complex::new(x, 0.0);
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.omega_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        let norm = 1.0 / self.fft_len as f64;
        let diag = self.diagonal();
        Ok((0..=n)
            .map(|j| diag * v[j] - buf[j].re * norm - m0 * self.tail(n - j + 1))
            .collect())
    }

    /// `O(n^2)` evaluation of [`apply`](Self::apply) for testing.
    pub fn apply_direct(&self, v: &[f64], m0: f64) -> Vec<f64> {
        let n = self.grid.n_cells() as isize;
        (0..=n)
            .map(|j| {
                let mut acc = 0.0;
                for k in 0..=n {
                    if k != j {
                        acc += self.omega[(k - j).unsigned_abs()] * (v[j as usize] - v[k as usize]);
                    }
                }
                acc + v[j as usize] * self.tail(j as usize + 1)
                    + (v[j as usize] - m0) * self.tail((n - j) as usize + 1)
            })
            .collect()
    }
}

/// Godunov flux for the convex Hamiltonian `h(p) = a p + b |p|^q` with
/// left and right one-sided slopes.
fn godunov(a: f64, b: f64, q: f64, pm: f64, pp: f64) -> f64 {
    let h = |p: f64| a * p + b * p.abs().powf(q);
    if pm <= pp {
        // unconstrained minimizer of h, clamped to [pm, pp]
        let star = -a.signum() * (a.abs() / (q * b)).powf(1.0 / (q - 1.0));
        h(star.clamp(pm, pp))
    } else {
        h(pm).max(h(pp))
    }
}

/// Monotone explicit scheme for the integrated convection equation.
#[derive(Debug, Clone)]
pub struct IntegratedScheme {
    stencil: NonlocalStencil,
    q: f64,
    b: f64,
}

impl IntegratedScheme {
    pub fn new(grid: Grid1D, s: f64, q: f64, b: f64) -> Result<Self> {
        if !(q > 1.0) || !(b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integrated scheme needs q > 1 and b > 0, got q = {q}, b = {b}"
            )));
        }
        Ok(Self {
            stencil: NonlocalStencil::new(grid, s)?,
            q,
            b,
        })
    }

    pub fn stencil(&self) -> &NonlocalStencil {
        &self.stencil
    }

    /// Largest step for which the update is a nondecreasing function of
    /// every node value.
    pub fn monotone_dt(&self, state: &IntegratedState) -> Result<f64> {
        let lv = self.stencil.apply(&state.v, state.m0)?;
        Ok(self.monotone_dt_with(state, &lv))
    }

    fn monotone_dt_with(&self, state: &IntegratedState, lv: &[f64]) -> f64 {
        let dx = self.stencil.grid().dx();
        let diag = self.stencil.diagonal();
        let v = &state.v;
        let mut worst = 0.0f64;
        for j in 1..v.len() - 1 {
            let p = ((v[j] - v[j - 1]) / dx)
                .max((v[j + 1] - v[j]) / dx)
                .max(0.0);
            let slope = lv[j].abs() + self.q * self.b * p.powf(self.q - 1.0);
            worst = worst.max(2.0 * slope / dx + p * diag);
        }
        if worst > 0.0 {
            1.0 / worst
        } else {
            f64::INFINITY
        }
    }

    /// One explicit step of size `dt`; boundary nodes stay pinned.
    pub fn step(&self, state: &IntegratedState, dt: f64) -> Result<IntegratedState> {
        let lv = self.stencil.apply(&state.v, state.m0)?;
        self.step_with(state, &lv, dt)
    }

    fn step_with(&self, state: &IntegratedState, lv: &[f64], dt: f64) -> Result<IntegratedState> {
        let bound = self.monotone_dt_with(state, lv);
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, bound });
        }
        let dx = self.stencil.grid().dx();
        let v = &state.v;
        let n = v.len() - 1;
        let mut next = v.clone();
        for j in 1..n {
            let pm = (v[j] - v[j - 1]) / dx;
            let pp = (v[j + 1] - v[j]) / dx;
            next[j] = v[j] - dt * godunov(lv[j], self.b, self.q, pm, pp);
        }
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotFinite { step: 0 });
        }
        next[0] = 0.0;
        next[n] = state.m0;
        let slack = MONOTONE_SLACK * state.m0;
        for j in 1..=n {
            if next[j] < next[j - 1] - slack {
                return Err(Error::MonotonicityLoss {
                    node: j,
                    left: next[j - 1],
                    right: next[j],
                });
            }
        }
        // remove rounding-level disorder and keep values in [0, M0]
        for j in 1..n {
            next[j] = next[j].max(next[j - 1]).min(state.m0);
        }
        Ok(IntegratedState {
            grid: state.grid,
            v: next,
            m0: state.m0,
            t: state.t + dt,
        })
    }

    /// Advances with `cfl` times the monotone step bound until physical time `t_target`.
    pub fn advance_to(
        &self,
        mut state: IntegratedState,
        t_target: f64,
        cfl: f64,
    ) -> Result<IntegratedState> {
        let dx = self.stencil.grid().dx();
        while t_target - state.t > 1e-13 * t_target.max(1.0) {
            let lv = self.stencil.apply(&state.v, state.m0)?;
            let bound = self.monotone_dt_with(&state, &lv);
            let dt = (cfl * bound.min(dx)).min(t_target - state.t);
            state = self.step_with(&state, &lv, dt)?;
        }
        state.t = t_target;
        Ok(state)
    }
}

/// Driver for configurations with `"equation": "convection_integrated"`.
#[derive(Debug, Clone)]
pub struct IntegratedSolver {
    config: SolverConfig,
    grid: Grid1D,
    scheme: IntegratedScheme,
}

impl IntegratedSolver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if config.equation != Equation::ConvectionIntegrated {
            return Err(Error::Config(format!(
                "integrated solver needs equation convection_integrated, got {:?}",
                config.equation
            )));
        }
        let grid = config.grid()?;
        let q = config
            .q
            .ok_or_else(|| Error::Config("convection_integrated needs q".into()))?;
        let scheme = IntegratedScheme::new(grid, config.s, q, config.b)?;
        Ok(Self {
            config,
            grid,
            scheme,
        })
    }

    pub fn scheme(&self) -> &IntegratedScheme {
        &self.scheme
    }

    pub fn initial_state(&self) -> Result<IntegratedState> {
        let u = initial_density(
            &self.config.initial,
            &self.grid,
            self.config.s,
            self.config.seed,
        )?;
        Ok(integrate_density(&u))
    }

    fn tau_of(&self, t: f64) -> f64 {
        let l = self.config.lambda();
        (l * t).exp_m1() / l
    }

    /// Diagnostics of the recovered density, mapped to similarity variables.
    pub fn diagnostics(&self, state: &IntegratedState) -> Result<DiagnosticsRecord> {
        let u = differentiate_cdf(state);
        let (rho, t) = similarity_transform(&u, state.t, self.config.s)?;
        let op = RieszOperator::new(*rho.grid(), self.config.s)?;
        Diagnostics::new(op, self.config.moment_order)?.record(&rho, t, state.t)
    }

    /// Integrates to similarity time `t_end`, recording every `output_every`.
    pub fn run(&self) -> Result<RunOutput> {
        let cfg = &self.config;
        debug_assert_eq!(cfg.frame, Frame::Physical);
        let mut state = self.initial_state()?;
        let mut records = vec![self.diagnostics(&state)?];
        let outputs = (cfg.t_end / cfg.output_every - 1e-9).ceil() as usize;
        for k in 1..=outputs {
            let target = (k as f64 * cfg.output_every).min(cfg.t_end);
            state = self
                .scheme
                .advance_to(state, self.tau_of(target), cfg.cfl)?;
            records.push(self.diagnostics(&state)?);
        }
        let rho = differentiate_cdf(&state);
        let t = records.last().map_or(0.0, |r| r.t);
        Ok(RunOutput {
            records,
            m_infinity: state.m0,
            final_state: SimState {
                rho,
                t,
                tau: state.t,
                steps: 0,
                absorbed_mass: 0.0,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barenblatt::BarenblattProfile;

    fn bump(grid: Grid1D, center: f64, width: f64, mass: f64) -> Field {
        let f = Field::from_fn(grid, |x| {
            let z = (x - center) / width;
            if z.abs() < 1.0 {
                (1.0 - z * z).powi(2)
            } else {
                0.0
            }
        });
        let m = f.mass();
        f.scaled(mass / m)
    }

    #[test]
    fn zero_density_gives_zero_cdf() {
        let g = Grid1D::new(2.0, 32).unwrap();
        let st = integrate_density(&Field::zeros(g));
        assert!(st.v.iter().all(|&x| x == 0.0));
        assert_eq!(differentiate_cdf(&st), Field::zeros(g));
    }

    #[test]
    fn profile_cdf_reaches_mass_and_inverts() {
        let g = Grid1D::new(2.0, 512).unwrap();
        let u = BarenblattProfile::from_radius(1.0, 0.25)
            .unwrap()
            .sample_on_grid(&g)
            .unwrap();
        let st = integrate_density(&u);
        assert!((st.v[512] - u.mass()).abs() < 1e-8 * u.mass());
        st.validate().unwrap();
        let back = differentiate_cdf(&st);
        assert!(back.l1_distance(&u).unwrap() < 1e-12);
    }

    #[test]
    fn stencil_weights_nonnegative_and_fast_matches_direct() {
        let g = Grid1D::new(2.0, 128).unwrap();
        let st = NonlocalStencil::new(g, 0.25).unwrap();
        assert!(st.weights()[1..].iter().all(|&w| w > 0.0));
        let u = bump(g, 0.2, 0.7, 1.3);
        let v = integrate_density(&u).v;
        let fast = st.apply(&v, 1.3).unwrap();
        let direct = st.apply_direct(&v, 1.3);
        let scale = direct.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn stencil_matches_derivative_of_potential() {
        // (-Delta)^{1-s} v = -d/dx (-Delta)^{-s} u at interior faces
        let g = Grid1D::new(2.0, 256).unwrap();
        let s = 0.25;
        let u = bump(g, -0.1, 0.8, 1.0);
        let st = integrate_density(&u);
        let lv = NonlocalStencil::new(g, s)
            .unwrap()
            .apply(&st.v, st.m0)
            .unwrap();
        let p = RieszOperator::new(g, s)
            .unwrap()
            .apply_extended(&u)
            .unwrap();
        let dx = g.dx();
        for j in 0..=256 {
            let grad = (p[j + 1] - p[j]) / dx;
            assert!(
                (lv[j] + grad).abs() < 1e-9 * (1.0 + grad.abs()),
                "{j}: {} {}",
                lv[j],
                grad
            );
        }
    }

    #[test]
    fn constant_states_are_stationary() {
        let g = Grid1D::new(2.0, 64).unwrap();
        let scheme = IntegratedScheme::new(g, 0.25, 3.0, 1.0).unwrap();
        let zero = integrate_density(&Field::zeros(g));
        let next = scheme.advance_to(zero.clone(), 0.5, 0.4).unwrap();
        assert_eq!(next.v, zero.v);
    }

    #[test]
    fn mass_and_boundaries_pinned_and_mass_moves_right() {
        let g = Grid1D::new(3.0, 256).unwrap();
        let scheme = IntegratedScheme::new(g, 0.25, 3.0, 1.0).unwrap();
        let u = bump(g, 0.0, 0.5, 1.0);
        let st0 = integrate_density(&u);
        let st = scheme.advance_to(st0.clone(), 0.2, 0.4).unwrap();
        st.validate().unwrap();
        assert!(st.v[0].abs() <= 1e-8 && (st.v[256] - st0.m0).abs() <= 1e-8 * st0.m0);
        let rho = differentiate_cdf(&st);
        assert!((rho.mass() - st0.m0).abs() < 1e-12);
        let mean = |f: &Field| {
            f.values()
                .iter()
                .enumerate()
                .map(|(i, x)| x * g.center(i as isize))
                .sum::<f64>()
                * g.dx()
        };
        assert!(mean(&rho) > mean(&u) + 1e-3);
    }

    #[test]
    fn oversized_step_rejected() {
        let g = Grid1D::new(2.0, 64).unwrap();
        let scheme = IntegratedScheme::new(g, 0.25, 3.0, 1.0).unwrap();
        let st = integrate_density(&bump(g, 0.0, 0.5, 1.0));
        let bound = scheme.monotone_dt(&st).unwrap();
        assert!(matches!(
            scheme.step(&st, 2.0 * bound),
            Err(Error::CflViolation { .. })
        ));
        assert!(IntegratedScheme::new(g, 0.25, 1.0, 1.0).is_err());
    }

    #[test]
    fn godunov_flux_is_consistent_and_monotone() {
        for a in [-2.0f64, -0.1, 0.0, 0.7] {
            for p in [0.0f64, 0.3, 1.5] {
                let h = a * p + p.powi(3);
                assert!((godunov(a, 1.0, 3.0, p, p) - h).abs() < 1e-14);
            }
            // nondecreasing in the left slope, nonincreasing in the right
            let base = godunov(a, 1.0, 3.0, 0.4, 0.6);
            assert!(godunov(a, 1.0, 3.0, 0.5, 0.6) >= base - 1e-15);
            assert!(godunov(a, 1.0, 3.0, 0.4, 0.7) <= base + 1e-15);
        }
    }
}
