//! Explicit conservative finite-volume scheme: upwind transport by the
//! nonlocal velocity, upwind convection, centered linear diffusion and an
//! exact per-cell absorption solve.

use super::config::{Equation, SolverConfig};
use super::initial::initial_density;
use super::transform::similarity_transform;
use crate::entropy::{Diagnostics, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::frac_ops::{FaceField, Frame, RieszOperator};
use crate::grid::{Field, Grid1D};

/// Mass allowed beyond `|x| > SUPPORT_FRACTION * L`, relative to `M_0`.
pub const SUPPORT_LEAK: f64 = 1e-10;
pub const SUPPORT_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Density in the solver's own frame (`rho(x, t)` or `u(y, tau)`).
    pub rho: Field,
    /// Similarity time.
    pub t: f64,
    /// Physical time, `tau = (e^{lambda t} - 1) / lambda`.
    pub tau: f64,
    pub steps: usize,
    /// `∫∫ P^{-delta} rho^r` accumulated so far.
    pub absorbed_mass: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SimState,
    /// `M_0 - absorbed mass`.
    pub m_infinity: f64,
}

/// Coefficients frozen over one step.
#[derive(Debug, Clone)]
pub struct StepRates {
    pub velocity: FaceField,
    /// multiplies `rho^r`
    pub absorption: f64,
    /// signed speed multiplying `(rho^q)_x`
    pub convection: f64,
}

#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    grid: Grid1D,
    op: RieszOperator,
    m0: f64,
    nyquist_symbol: f64,
}

/// `sum_k w_k (-1)^k` over the symmetric kernel table.
fn nyquist_symbol(weights: &[f64]) -> f64 {
    let tail: f64 = weights
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, w)| if k % 2 == 0 { *w } else { -*w })
        .sum();
    weights[0] + 2.0 * tail
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if config.equation == Equation::ConvectionIntegrated {
            return Err(Error::Config(
                "convection_integrated is evolved by the integrated scheme".into(),
            ));
        }
        let grid = config.grid()?;
        let op = RieszOperator::new(grid, config.s)?;
        let m0 = config.initial_mass();
        let nyquist_symbol = nyquist_symbol(op.table().weights());
        Ok(Self {
            config,
            grid,
            op,
            m0,
            nyquist_symbol,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn operator(&self) -> &RieszOperator {
        &self.op
    }

    pub fn initial_state(&self) -> Result<SimState> {
        let rho = initial_density(
            &self.config.initial,
            &self.grid,
            self.config.s,
            self.config.seed,
        )?;
        Ok(self.state_from(rho))
    }

    /// State at `t = 0` with a caller-supplied density.
    pub fn state_from(&self, rho: Field) -> SimState {
        SimState {
            rho,
            t: 0.0,
            tau: 0.0,
            steps: 0,
            absorbed_mass: 0.0,
        }
    }

    fn lambda(&self) -> f64 {
        self.config.lambda()
    }

    fn tau_of(&self, t: f64) -> f64 {
        let l = self.lambda();
        (l * t).exp_m1() / l
    }

    fn t_of(&self, tau: f64) -> f64 {
        let l = self.lambda();
        (l * tau).ln_1p() / l
    }

    pub fn rates(&self, state: &SimState) -> Result<StepRates> {
        let cfg = &self.config;
        let velocity = self.op.velocity(&state.rho, cfg.frame)?;
        // P(t) = e^{lambda t}; coefficients are 1 in the physical frame
        let log_p = match cfg.frame {
            Frame::Similarity => self.lambda() * state.t,
            Frame::Physical => 0.0,
        };
        let absorption = match cfg.equation {
            Equation::Absorption => (-cfg.delta().unwrap_or(0.0) * log_p).exp(),
            _ => 0.0,
        };
        let convection = match cfg.equation {
            Equation::Convection => cfg.b * (-cfg.theta().unwrap_or(0.0) * log_p).exp(),
            _ => 0.0,
        };
        Ok(StepRates {
            velocity,
            absorption,
            convection,
        })
    }

    /// `cfl * min(dx / max|v|, dx^2 / (2 eps), dx / (q max rho^{q-1} |c|), dx^2 / (2 max rho K))`
    /// where `K` is the symbol of the discrete potential at the Nyquist
    /// frequency; `cfl * dx` for the empty state.
    pub fn cfl_dt(&self, state: &SimState) -> Result<f64> {
        let rates = self.rates(state)?;
        Ok(self.cfl_dt_with(state, &rates))
    }

    pub fn cfl_dt_with(&self, state: &SimState, rates: &StepRates) -> f64 {
        let cfg = &self.config;
        let dx = self.grid.dx();
        if state.rho.values().iter().all(|&v| v == 0.0) {
            return cfg.cfl * dx;
        }
        let mut bound = f64::INFINITY;
        let vmax = rates.velocity.max_abs();
        if vmax > 0.0 {
            bound = bound.min(dx / vmax);
        }
        if cfg.epsilon > 0.0 {
            bound = bound.min(dx * dx / (2.0 * cfg.epsilon));
        }
        let rho_max = state.rho.linf();
        if rho_max > 0.0 && self.nyquist_symbol > 0.0 {
            bound = bound.min(dx * dx / (2.0 * rho_max * self.nyquist_symbol));
        }
        if rates.convection != 0.0 {
            let q = cfg.q.unwrap_or(1.0);
            let speed = q * state.rho.linf().powf(q - 1.0) * rates.convection.abs();
            if speed > 0.0 {
                bound = bound.min(dx / speed);
            }
        }
        if !bound.is_finite() {
            bound = dx;
        }
        cfg.cfl * bound
    }

    /// Largest `dt` keeping every cell nonnegative under the explicit flux
    /// update: `1 / max_i (outflow rate of cell i)`.
    pub fn positivity_dt(&self, state: &SimState, rates: &StepRates) -> f64 {
        let cfg = &self.config;
        let dx = self.grid.dx();
        let v = rates.velocity.values();
        let q = cfg.q.unwrap_or(1.0);
        let n = self.grid.n_cells();
        let mut worst = 0.0f64;
        for i in 0..n {
            let left_out = if i > 0 { (-v[i]).max(0.0) } else { 0.0 };
            let right_out = if i + 1 < n { v[i + 1].max(0.0) } else { 0.0 };
            let mut rate = (left_out + right_out) / dx;
            if cfg.epsilon > 0.0 {
                rate += 2.0 * cfg.epsilon / (dx * dx);
            }
            if rates.convection != 0.0 {
                rate += rates.convection.abs() * state.rho.values()[i].max(0.0).powf(q - 1.0) / dx;
            }
            worst = worst.max(rate);
        }
        if worst > 0.0 {
            1.0 / worst
        } else {
            f64::INFINITY
        }
    }

    /// One step of size `dt` in the solver's native time.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        let rates = self.rates(state)?;
        self.step_with(state, &rates, dt)
    }

    /// One step with `dt` from [`cfl_dt`](Self::cfl_dt), reduced to the positivity bound if needed.
    pub fn step_auto(&self, state: &SimState) -> Result<SimState> {
        let rates = self.rates(state)?;
        let dt = self
            .cfl_dt_with(state, &rates)
            .min(self.positivity_dt(state, &rates));
        self.step_with(state, &rates, dt)
    }

    pub fn step_with(&self, state: &SimState, rates: &StepRates, dt: f64) -> Result<SimState> {
        let cfg = &self.config;
        let bound = self.positivity_dt(state, rates);
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, bound });
        }
        let n = self.grid.n_cells();
        let dx = self.grid.dx();
        let rho = state.rho.values();
        let v = rates.velocity.values();
        let q = cfg.q.unwrap_or(1.0);

        // flux through face j (between cells j-1 and j); boundary faces closed
        let mut flux = vec![0.0; n + 1];
        for j in 1..n {
            let (l, r) = (rho[j - 1], rho[j]);
            let vj = v[j];
            let mut f = vj.max(0.0) * l + vj.min(0.0) * r;
            if cfg.epsilon > 0.0 {
                f -= cfg.epsilon * (r - l) / dx;
            }
            if rates.convection != 0.0 {
                let upwind = if rates.convection > 0.0 { l } else { r };
                f += rates.convection * upwind.max(0.0).powf(q);
            }
            flux[j] = f;
        }
        let ratio = dt / dx;
        let mut next: Vec<f64> = (0..n)
            .map(|i| (rho[i] - ratio * (flux[i + 1] - flux[i])).max(0.0))
            .collect();

        let mut absorbed = 0.0;
        if rates.absorption > 0.0 {
            let r = cfg.r.unwrap_or(1.0);
            let k = (r - 1.0) * rates.absorption * dt;
            for x in next.iter_mut() {
                if *x > 0.0 {
                    // exact solution of y' = -a y^r over the step
                    let y = (x.powf(1.0 - r) + k).powf(-1.0 / (r - 1.0));
                    absorbed += *x - y;
                    *x = y;
                }
            }
            absorbed *= dx;
        }

        let steps = state.steps + 1;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotFinite { step: steps });
        }
        let rho = Field::from_values(self.grid, next)?;
        let (t, tau) = match cfg.frame {
            Frame::Similarity => {
                let t = state.t + dt;
                (t, self.tau_of(t))
            }
            Frame::Physical => {
                let tau = state.tau + dt;
                (self.t_of(tau), tau)
            }
        };
        let out = SimState {
            rho,
            t,
            tau,
            steps,
            absorbed_mass: state.absorbed_mass + absorbed,
        };
        self.check_support(&out)?;
        Ok(out)
    }

    pub fn check_support(&self, state: &SimState) -> Result<()> {
        let radius = SUPPORT_FRACTION * self.grid.half_width();
        let outside = state.rho.mass_outside(radius);
        let limit = SUPPORT_LEAK * self.m0;
        if outside > limit {
            Err(Error::SupportEscape {
                outside,
                radius,
                limit,
            })
        } else {
            Ok(())
        }
    }

    /// Density in similarity variables together with its grid.
    pub fn similarity_density(&self, state: &SimState) -> Result<Field> {
        match self.config.frame {
            Frame::Similarity => Ok(state.rho.clone()),
            Frame::Physical => Ok(similarity_transform(&state.rho, state.tau, self.config.s)?.0),
        }
    }

    pub fn diagnostics(&self, state: &SimState) -> Result<DiagnosticsRecord> {
        let order = self.config.moment_order;
        match self.config.frame {
            Frame::Similarity => {
                Diagnostics::new(self.op.clone(), order)?.record(&state.rho, state.t, state.tau)
            }
            Frame::Physical => {
                let rho = self.similarity_density(state)?;
                let op = RieszOperator::new(*rho.grid(), self.config.s)?;
                Diagnostics::new(op, order)?.record(&rho, state.t, state.tau)
            }
        }
    }

    /// Advances from `state` until similarity time `t_target`.
    pub fn advance_to(&self, mut state: SimState, t_target: f64) -> Result<SimState> {
        let physical = self.config.frame == Frame::Physical;
        let tau_target = self.tau_of(t_target);
        loop {
            let remaining = if physical {
                tau_target - state.tau
            } else {
                t_target - state.t
            };
            let scale = if physical { tau_target } else { t_target };
            if remaining <= 1e-13 * scale.max(1.0) {
                break;
            }
            let rates = self.rates(&state)?;
            let dt = self
                .cfl_dt_with(&state, &rates)
                .min(self.positivity_dt(&state, &rates))
                .min(remaining);
            state = self.step_with(&state, &rates, dt)?;
        }
        state.t = t_target;
        state.tau = tau_target;
        Ok(state)
    }

    /// Integrates to `t_end`, recording diagnostics every `output_every`
    /// similarity-time units (and at `t = 0`).
    pub fn run(&self) -> Result<RunOutput> {
        let state = self.initial_state()?;
        self.run_from(state)
    }

    pub fn run_from(&self, mut state: SimState) -> Result<RunOutput> {
        let cfg = &self.config;
        let mut records = vec![self.diagnostics(&state)?];
        let outputs = (cfg.t_end / cfg.output_every - 1e-9).ceil() as usize;
        let mut early_m2 = records[0].m2;
        for k in 1..=outputs {
            let target = (k as f64 * cfg.output_every).min(cfg.t_end);
            state = self.advance_to(state, target)?;
            let rec = self.diagnostics(&state)?;
            if rec.t <= 1.0 {
                early_m2 = early_m2.max(rec.m2);
            } else if rec.m2 > 10.0 * early_m2 {
                log::warn!(
                    "second moment {} exceeds 10x its early maximum {} at t = {}",
                    rec.m2,
                    early_m2,
                    rec.t
                );
            }
            log::debug!(
                "t = {:.4} H_rel = {:e} mass = {}",
                rec.t,
                rec.h_rel,
                rec.mass
            );
            records.push(rec);
        }
        Ok(RunOutput {
            records,
            m_infinity: self.m0 - state.absorbed_mass,
            final_state: state,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::config::InitialCondition;

    fn config(equation: Equation) -> SolverConfig {
        SolverConfig {
            equation,
            frame: Frame::Similarity,
            s: 0.25,
            r: Some(4.0),
            q: Some(3.0),
            b: 1.0,
            epsilon: 0.0,
            half_width: Some(4.0),
            n: 256,
            cfl: 0.4,
            t_end: 1.0,
            output_every: 0.5,
            initial: InitialCondition::Box {
                mass: 1.0,
                center: 0.0,
                half_width: 0.6,
            },
            seed: 0,
            moment_order: 4,
        }
    }

    #[test]
    fn empty_state_dt_is_cfl_dx() {
        let solver = Solver::new(config(Equation::Pure)).unwrap();
        let state = solver.state_from(Field::zeros(*solver.grid()));
        let dt = solver.cfl_dt(&state).unwrap();
        assert!((dt - 0.4 * solver.grid().dx()).abs() < 1e-16);
        // and it stays empty
        let next = solver.step_auto(&state).unwrap();
        assert!(next.rho.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dt_is_the_tightest_of_transport_and_nonlocal_limits() {
        let solver = Solver::new(config(Equation::Pure)).unwrap();
        let state = solver.initial_state().unwrap();
        let rates = solver.rates(&state).unwrap();
        let dt = solver.cfl_dt_with(&state, &rates);
        let dx = solver.grid().dx();
        let transport = dx / rates.velocity.max_abs();
        let nonlocal = dx * dx / (2.0 * state.rho.linf() * solver.nyquist_symbol);
        assert!(solver.nyquist_symbol > 0.0);
        assert!((dt - 0.4 * transport.min(nonlocal)).abs() < 1e-15);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let solver = Solver::new(config(Equation::Pure)).unwrap();
        let state = solver.initial_state().unwrap();
        let rates = solver.rates(&state).unwrap();
        let bound = solver.positivity_dt(&state, &rates);
        let err = solver.step_with(&state, &rates, 3.0 * bound).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn transport_conserves_mass() {
        for eq in [Equation::Pure, Equation::Convection] {
            let mut cfg = config(eq);
            cfg.epsilon = 1e-3;
            let solver = Solver::new(cfg).unwrap();
            let mut state = solver.initial_state().unwrap();
            let m0 = state.rho.mass();
            for _ in 0..200 {
                let m = state.rho.mass();
                state = solver.step_auto(&state).unwrap();
                assert!((state.rho.mass() - m).abs() <= 1e-13 * m0);
                assert!(state.rho.min() >= 0.0);
            }
        }
    }

    #[test]
    fn absorption_update_vanishes_with_coefficient() {
        // a -> 0 in (y^{1-r} + (r-1) a dt)^{-1/(r-1)} leaves the state unchanged
        let solver = Solver::new(config(Equation::Absorption)).unwrap();
        let state = solver.initial_state().unwrap();
        let mut rates = solver.rates(&state).unwrap();
        let dt = 0.5 * solver.positivity_dt(&state, &rates);
        let reference = {
            rates.absorption = 0.0;
            solver.step_with(&state, &rates, dt).unwrap()
        };
        let mut prev = f64::INFINITY;
        for a in [1e-2, 1e-4, 1e-6, 1e-8] {
            rates.absorption = a;
            let s = solver.step_with(&state, &rates, dt).unwrap();
            let d = s.rho.l1_distance(&reference.rho).unwrap();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn absorption_strictly_removes_mass() {
        let solver = Solver::new(config(Equation::Absorption)).unwrap();
        let mut state = solver.initial_state().unwrap();
        for _ in 0..50 {
            let m = state.rho.mass();
            state = solver.step_auto(&state).unwrap();
            assert!(state.rho.mass() < m);
            assert!(state.rho.min() >= 0.0);
            assert!((state.rho.mass() + state.absorbed_mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn support_escape_is_reported() {
        let mut cfg = config(Equation::Pure);
        cfg.frame = Frame::Physical;
        cfg.half_width = Some(1.0);
        cfg.initial = InitialCondition::Box {
            mass: 1.0,
            center: 0.0,
            half_width: 0.5,
        };
        let solver = Solver::new(cfg).unwrap();
        let err = solver.run().unwrap_err();
        assert!(matches!(err, Error::SupportEscape { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }
}
