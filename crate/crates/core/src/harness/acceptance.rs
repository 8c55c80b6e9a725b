//! Acceptance suite: each criterion is a self-contained check returning a
//! [`CriterionResult`]; simulation runs shared between criteria are computed once.

use super::experiment::{count_violations, entropy_scale, INEQUALITY_TOLERANCE};
use super::fit::{fit_decay_rate, theoretical_rate, PrefactorMode, Quantity, DEFAULT_WINDOW};
use super::thread_pool;
use crate::barenblatt::{mass_from_radius, radius_from_mass, BarenblattProfile};
use crate::entropy::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::frac_ops::{
    frac_laplacian_with, homog_sobolev_norm, riesz_potential, riesz_potential_direct, Frame,
    RieszConstant, RieszOperator, SpectralOptions,
};
use crate::grid::{Field, Grid1D};
use crate::integrated::{differentiate_cdf, integrate_density, IntegratedScheme, IntegratedState};
use crate::solver::{lp_decay_check, Equation, InitialCondition, RunOutput, Solver, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

pub const ALL_CRITERIA: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Which criteria to run and at what resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_criteria")]
    pub criteria: Vec<u32>,
    /// cells for the simulation criteria
    #[serde(default = "default_n")]
    pub n: usize,
    /// finest grid of the profile criterion (the coarser one has half the cells)
    #[serde(default = "default_profile_n")]
    pub profile_n: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_criteria() -> Vec<u32> {
    ALL_CRITERIA.to_vec()
}

fn default_n() -> usize {
    2048
}

fn default_profile_n() -> usize {
    4096
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            criteria: default_criteria(),
            n: default_n(),
            profile_n: default_profile_n(),
            seed: 0,
        }
    }
}

impl SuiteConfig {
    /// Parses a suite file; a blank file is the empty suite.
    pub fn from_json_str(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self {
                criteria: Vec::new(),
                ..Self::default()
            });
        }
        let suite: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(bad) = suite.criteria.iter().find(|c| !ALL_CRITERIA.contains(c)) {
            return Err(Error::Config(format!(
                "unknown criterion {bad}; valid ids are 1 to 12"
            )));
        }
        Ok(suite)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// `PASS [id] name: detail` or `FAIL ...`.
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Runs the selected criteria (concurrently, bounded by `FRACPME_THREADS`).
pub fn verify(suite: &SuiteConfig) -> Result<VerifyReport> {
    let mut warnings = Vec::new();
    if suite.criteria.is_empty() {
        let msg = "suite selects no criteria; nothing was checked".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let runs = Runs::new(suite.n);
    let pool = thread_pool()?;
    let mut criteria: Vec<CriterionResult> = pool.install(|| {
        suite
            .criteria
            .par_iter()
            .map(|&id| run_criterion(id, suite, &runs))
            .collect()
    });
    criteria.sort_by_key(|c| c.id);
    let pass = criteria.iter().all(|c| c.pass);
    Ok(VerifyReport {
        criteria,
        warnings,
        pass,
    })
}

fn run_criterion(id: u32, suite: &SuiteConfig, runs: &Runs) -> CriterionResult {
    let start = Instant::now();
    let (name, outcome) = match id {
        1 => (
            "operator oracle equivalence",
            oracle_equivalence(suite.seed),
        ),
        2 => ("multiplier consistency", multiplier_consistency()),
        3 => ("Barenblatt validity", barenblatt_validity(suite.profile_n)),
        4 => ("stationarity", stationarity(runs)),
        5 => ("pure-diffusion rate", pure_rate(runs)),
        6 => ("absorption rate", absorption_rate(runs)),
        7 => ("convection rate", convection_rate(runs)),
        8 => ("inequality suite", inequality_suite(runs)),
        9 => ("Lp decay", lp_decay(runs)),
        10 => (
            "integrated-form cross-check",
            integrated_cross_check(suite.n, suite.seed),
        ),
        11 => ("Stroock-Varopoulos", stroock_varopoulos(suite.seed)),
        12 => (
            "regularization consistency",
            regularization_consistency(runs),
        ),
        _ => (
            "unknown",
            Err(Error::Config(format!("unknown criterion {id}"))),
        ),
    };
    let (pass, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: name.to_string(),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

type Outcome = Result<(bool, String)>;

fn rel_l2(a: &Field, b: &Field) -> Result<f64> {
    Ok(a.sub(b)?.l2() / b.l2())
}

fn random_nonnegative_field(grid: Grid1D, rng: &mut ChaCha8Rng) -> Field {
    let count = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(-0.4..0.4) * grid.half_width(),
                rng.gen_range(0.05..0.3) * grid.half_width(),
                rng.gen_range(0.2..1.5),
            )
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, a)| {
                let z = (x - c) / w;
                if z.abs() < 1.0 {
                    a * (1.0 - z * z).powi(4)
                } else {
                    0.0
                }
            })
            .sum()
    })
}

/// Criterion 1: fast potential against the direct sum on 20 random fields.
pub fn oracle_equivalence(seed: u64) -> Outcome {
    let start = Instant::now();
    let grid = Grid1D::new(4.0, 1024)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = Field::from_values(grid, (0..1024).map(|_| rng.gen::<f64>()).collect())?;
        let fast = riesz_potential(&f, 0.25)?;
        let direct = riesz_potential_direct(&f, 0.25)?;
        worst = worst.max(rel_l2(&fast, &direct)?);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-10 && secs < 5.0,
        format!(
            "max relative L2 error {worst:.2e} (<= 1e-10) over 20 fields in {secs:.2} s (< 5 s)"
        ),
    ))
}

/// Sixth derivative of a Gaussian: mean zero, effectively band limited.
pub fn hermite_gaussian_field(grid: Grid1D) -> Field {
    let sigma = grid.half_width() / 8.0;
    Field::from_fn(grid, |x| {
        let z = x / sigma;
        let z2 = z * z;
        (z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0) * (-0.5 * z2).exp()
    })
}

/// Criterion 2: `(-Delta)^s` of the potential recovers a mean-zero field.
pub fn multiplier_consistency() -> Outcome {
    let s = 0.25;
    let grid = Grid1D::new(8.0, 1024)?;
    let f = hermite_gaussian_field(grid);
    let opts = SpectralOptions { pad: 8 };
    let err = |kind| -> Result<f64> {
        let p = RieszOperator::with_constant(grid, s, kind)?.apply(&f)?;
        rel_l2(&frac_laplacian_with(&p, 2.0 * s, opts)?, &f)
    };
    let standard = err(RieszConstant::Standard)?;
    let printed = err(RieszConstant::Printed)?;
    Ok((
        standard <= 1e-4,
        format!("relative L2 error {standard:.2e} (<= 1e-4); the alternative constant gives {printed:.2e}"),
    ))
}

/// Criterion 3: Euler-Lagrange residual, its refinement and the mass relation.
pub fn barenblatt_validity(n: usize) -> Outcome {
    let start = Instant::now();
    let (s, radius) = (0.25, 1.0);
    let profile = BarenblattProfile::from_radius(radius, s)?;
    let fine = profile.euler_lagrange_residual(&Grid1D::new(2.0 * radius, n)?)?;
    // the half-resolution grid may be below the minimum size
    let coarse = Grid1D::new(2.0 * radius, n / 2)
        .and_then(|g| profile.euler_lagrange_residual(&g))
        .ok();
    let mass = profile.mass();
    let quad = profile.integral(-radius, radius);
    let round_trip = (mass_from_radius(radius_from_mass(mass, s)?, s)? - mass).abs() / mass;
    let quad_err = (quad - mass).abs() / mass;
    let ratio = coarse.map_or(f64::NAN, |c| c.interior_sup / fine.interior_sup);
    let secs = start.elapsed().as_secs_f64();
    let pass = fine.interior_sup <= 1e-2
        && ratio >= 2.0
        && fine.exterior_min >= -1e-3
        && round_trip <= 1e-8
        && quad_err <= 1e-8
        && secs < 30.0;
    Ok((
        pass,
        format!(
            "interior residual {:.2e} at n={n} (<= 1e-2), refinement ratio {ratio:.2} (>= 2), \
             exterior margin {:.2e} (>= -1e-3), mass round trip {round_trip:.1e} and quadrature {quad_err:.1e} (<= 1e-8)",
            fine.interior_sup, fine.exterior_min
        ),
    ))
}

/// Shared simulation runs, computed on first use.
struct Runs {
    n: usize,
    stationary: OnceLock<Result<(RunOutput, Vec<f64>)>>,
    pure: OnceLock<Result<TimedRun>>,
    absorption: OnceLock<Result<TimedRun>>,
    convection: OnceLock<Result<TimedRun>>,
    physical: OnceLock<Result<TimedRun>>,
    eps_large: OnceLock<Result<TimedRun>>,
    eps_small: OnceLock<Result<TimedRun>>,
}

struct TimedRun {
    config: SolverConfig,
    output: RunOutput,
    seconds: f64,
}

fn box_config(equation: Equation, n: usize) -> SolverConfig {
    SolverConfig {
        equation,
        frame: Frame::Similarity,
        s: 0.25,
        r: Some(4.0),
        q: Some(3.0),
        b: 1.0,
        epsilon: 0.0,
        half_width: None,
        n,
        cfl: 0.4,
        t_end: 4.0,
        output_every: 0.125,
        initial: InitialCondition::Box {
            mass: 1.0,
            center: 0.0,
            half_width: 0.5,
        },
        seed: 0,
        moment_order: 4,
    }
}

fn timed(config: SolverConfig) -> Result<TimedRun> {
    let start = Instant::now();
    let output = Solver::new(config.clone())?.run()?;
    Ok(TimedRun {
        config,
        output,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn shared<T>(cell: &OnceLock<Result<T>>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(f)
        .as_ref()
        .map_err(|e| Error::Config(format!("shared run failed: {e}")))
}

impl Runs {
    fn new(n: usize) -> Self {
        Self {
            n,
            stationary: OnceLock::new(),
            pure: OnceLock::new(),
            absorption: OnceLock::new(),
            convection: OnceLock::new(),
            physical: OnceLock::new(),
            eps_large: OnceLock::new(),
            eps_small: OnceLock::new(),
        }
    }

    fn stationary(&self) -> Result<&(RunOutput, Vec<f64>)> {
        shared(&self.stationary, || stationary_run(self.n))
    }

    fn pure(&self) -> Result<&TimedRun> {
        shared(&self.pure, || timed(box_config(Equation::Pure, self.n)))
    }

    fn absorption(&self) -> Result<&TimedRun> {
        shared(&self.absorption, || {
            timed(box_config(Equation::Absorption, self.n))
        })
    }

    fn convection(&self) -> Result<&TimedRun> {
        shared(&self.convection, || {
            timed(box_config(Equation::Convection, self.n))
        })
    }

    fn physical(&self) -> Result<&TimedRun> {
        shared(&self.physical, || {
            let mut cfg = box_config(Equation::Absorption, self.n);
            cfg.frame = Frame::Physical;
            cfg.half_width = Some(16.0);
            cfg.t_end = 2.5;
            cfg.output_every = 0.05;
            timed(cfg)
        })
    }

    fn regularized(&self, epsilon: f64) -> Result<&TimedRun> {
        let cell = if epsilon > 5e-3 {
            &self.eps_large
        } else {
            &self.eps_small
        };
        shared(cell, || {
            let mut cfg = box_config(Equation::Absorption, self.n);
            cfg.epsilon = epsilon;
            timed(cfg)
        })
    }
}

/// Pure run from the sampled profile; also returns `‖rho(t) - rho_M‖_1 / M` per output.
fn stationary_run(n: usize) -> Result<(RunOutput, Vec<f64>)> {
    let cfg = SolverConfig {
        half_width: Some(2.0),
        t_end: 5.0,
        output_every: 0.5,
        initial: InitialCondition::PerturbedBarenblatt {
            mass: 1.0,
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
        },
        ..box_config(Equation::Pure, n)
    };
    let solver = Solver::new(cfg.clone())?;
    let mut state = solver.initial_state()?;
    let reference = state.rho.clone();
    let mass = reference.mass();
    let mut records = vec![solver.diagnostics(&state)?];
    let mut errors = vec![0.0];
    let outputs = (cfg.t_end / cfg.output_every).round() as usize;
    for k in 1..=outputs {
        state = solver.advance_to(state, k as f64 * cfg.output_every)?;
        records.push(solver.diagnostics(&state)?);
        errors.push(state.rho.l1_distance(&reference)? / mass);
    }
    Ok((
        RunOutput {
            records,
            m_infinity: mass,
            final_state: state,
        },
        errors,
    ))
}

/// Criterion 4: `L1` deviation from the sampled profile. It starts at 0 and
/// settles onto the distance between the sampled profile and the discrete
/// steady state. It counts as non-growing when every increase after the
/// first output is no larger than the one before it.
fn stationarity(runs: &Runs) -> Outcome {
    let (_, errors) = runs.stationary()?;
    let max = errors.iter().cloned().fold(0.0, f64::max);
    let steps: Vec<f64> = errors[1..].windows(2).map(|w| w[1] - w[0]).collect();
    let saturating = steps.windows(2).all(|w| w[1] <= w[0].max(0.0) + 1e-15);
    let drift = errors[errors.len() - 1] - errors[1];
    let last = steps.last().copied().unwrap_or(0.0);
    Ok((
        max <= 2e-2 && saturating,
        format!(
            "max L1 deviation / M {max:.2e} (<= 2e-2); increments after t = 0.5 shrinking: {saturating} \
             (total change {drift:.1e}, last increment {last:.1e})"
        ),
    ))
}

fn rate_outcome(run: &TimedRun, mode: PrefactorMode, limit: f64) -> Result<(bool, String, f64)> {
    let rate = theoretical_rate(&run.config)?;
    let scale = entropy_scale(&run.config)?;
    let fit = fit_decay_rate(
        &run.output.records,
        Quantity::HRel,
        mode,
        DEFAULT_WINDOW,
        super::experiment::FIT_FLOOR * scale,
        rate,
    )?;
    let bound = super::fit::PASS_FRACTION * fit.theoretical_exponent;
    let pass = fit.passes() && run.seconds < limit;
    let text = format!(
        "fitted exponent {:.3} (<= {bound:.2}, theory {:.2}) on t in [{:.2}, {:.2}], residual rms {:.2e}, {:.0} s",
        fit.fitted_exponent, fit.theoretical_exponent, fit.fit_window[0], fit.fit_window[1], fit.residual_rms, run.seconds
    );
    Ok((pass, text, fit.fitted_exponent))
}

/// Criterion 5: `H_rel` decay rate of the pure equation from box data.
fn pure_rate(runs: &Runs) -> Outcome {
    let run = runs.pure()?;
    let (pass, text, _) = rate_outcome(run, PrefactorMode::None, 300.0)?;
    Ok((pass, text))
}

/// Criterion 6: `H_rel` decay rate with absorption, mass loss and `M_inf`.
fn absorption_rate(runs: &Runs) -> Outcome {
    let run = runs.absorption()?;
    let (fit_pass, text, _) = rate_outcome(run, PrefactorMode::LogSquare, 600.0)?;
    let masses: Vec<f64> = run.output.records.iter().map(|r| r.mass).collect();
    let decreasing = masses.windows(2).all(|w| w[1] < w[0]);
    let m_inf = run.output.m_infinity;
    Ok((
        fit_pass && decreasing && m_inf > 0.0,
        format!("{text}; mass strictly decreasing: {decreasing}; M_inf estimate {m_inf:.4}"),
    ))
}

/// Criterion 7: `H_rel` decay rate with convection and mass conservation.
fn convection_rate(runs: &Runs) -> Outcome {
    let run = runs.convection()?;
    let (fit_pass, text, _) = rate_outcome(run, PrefactorMode::LogSquare, 600.0)?;
    let m0 = run.config.initial_mass();
    let drift = run
        .output
        .records
        .iter()
        .map(|r| (r.mass - m0).abs())
        .fold(0.0, f64::max)
        / m0;
    Ok((
        fit_pass && drift <= 1e-10,
        format!("{text}; relative mass drift {drift:.1e} (<= 1e-10)"),
    ))
}

/// Criterion 8: entropy inequalities at every logged step of runs 4 to 7.
fn inequality_suite(runs: &Runs) -> Outcome {
    let stationary = runs.stationary()?;
    let sets: [&[DiagnosticsRecord]; 4] = [
        &stationary.0.records,
        &runs.pure()?.output.records,
        &runs.absorption()?.output.records,
        &runs.convection()?.output.records,
    ];
    let scale = entropy_scale(&box_config(Equation::Pure, runs.n))?;
    let tol = INEQUALITY_TOLERANCE * scale;
    let mut total = 0;
    let mut worst = [f64::INFINITY; 3];
    let mut steps = 0;
    for records in sets {
        total += count_violations(records, tol).total();
        steps += records.len();
        for r in records {
            for (w, m) in worst.iter_mut().zip(r.inequality_margins()) {
                *w = w.min(m);
            }
        }
    }
    Ok((
        total == 0,
        format!(
            "{total} violations over {steps} logged steps (tol {tol:.1e}); smallest margins: \
             entropy-dissipation {:.2e}, hneg_s_sq {:.2e}, w2 {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    ))
}

/// Criterion 9: decay of `sup |u|` in physical variables with absorption.
fn lp_decay(runs: &Runs) -> Outcome {
    let run = runs.physical()?;
    let slope = lp_decay_check(&run.output.records, f64::INFINITY)?;
    let tau_max = run.output.records.last().map_or(0.0, |r| r.tau);
    Ok((
        slope <= -0.3,
        format!("slope of log sup|u| vs log tau on [{:.1}, {tau_max:.1}]: {slope:.3} (<= -0.3, theory -0.4)", 0.1 * tau_max),
    ))
}

/// Criterion 10: integrated scheme against the finite-volume solver.
pub fn integrated_cross_check(n: usize, seed: u64) -> Outcome {
    let (s, q) = (0.25, 3.0);
    let cfg = SolverConfig {
        frame: Frame::Physical,
        half_width: Some(3.0),
        t_end: 1.0,
        output_every: 1.0,
        initial: InitialCondition::Gaussian {
            mass: 1.0,
            center: -0.3,
            sigma: 0.3,
            cutoff: 4.0,
        },
        ..box_config(Equation::Convection, n)
    };
    let solver = Solver::new(cfg.clone())?;
    let lam = cfg.lambda();
    let start = solver.initial_state()?;
    let fv = solver.advance_to(start.clone(), (1.0 + lam).ln() / lam)?;
    let scheme = IntegratedScheme::new(*solver.grid(), s, q, cfg.b)?;
    let st = scheme.advance_to(integrate_density(&start.rho), fv.tau, cfg.cfl)?;
    st.validate()?;
    let diff = differentiate_cdf(&st).l1_distance(&fv.rho)? / st.m0;

    let violations = comparison_violations(s, q, seed)?;
    Ok((
        diff <= 0.03 && violations == 0,
        format!(
            "L1 difference at tau = 1: {:.2}% of M0 (<= 3%); comparison violations on 10 ordered pairs: {violations}",
            100.0 * diff
        ),
    ))
}

/// Steps 10 ordered pairs `v1 <= v2` with a shared time step and counts
/// node-wise order violations.
pub fn comparison_violations(s: f64, q: f64, seed: u64) -> Result<usize> {
    let grid = Grid1D::new(3.0, 256)?;
    let scheme = IntegratedScheme::new(grid, s, q, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut violations = 0;
    for pair in 0..10 {
        let normalized = |rng: &mut ChaCha8Rng| -> Result<IntegratedState> {
            let f = random_nonnegative_field(grid, rng);
            let m = f.mass();
            Ok(integrate_density(&f.scaled(1.0 / m)))
        };
        let mut a = normalized(&mut rng)?;
        let mut b = if pair % 2 == 0 {
            // same profile shifted left by a few cells
            let k = rng.gen_range(1..6);
            let mut b = a.clone();
            let n = b.v.len();
            for j in 0..n {
                b.v[j] = a.v[(j + k).min(n - 1)];
            }
            b
        } else {
            // pointwise maximum with an unrelated distribution function
            let other = normalized(&mut rng)?;
            let mut b = a.clone();
            for (x, y) in b.v.iter_mut().zip(&other.v) {
                *x = x.max(*y);
            }
            b
        };
        a.m0 = 1.0;
        b.m0 = 1.0;
        let n = a.v.len() - 1;
        a.v[n] = 1.0;
        b.v[n] = 1.0;
        while a.t < 0.3 {
            let dt = 0.4
                * scheme
                    .monotone_dt(&a)?
                    .min(scheme.monotone_dt(&b)?)
                    .min(grid.dx());
            a = scheme.step(&a, dt)?;
            b = scheme.step(&b, dt)?;
            violations +=
                a.v.iter()
                    .zip(&b.v)
                    .filter(|(x, y)| **x > **y + 1e-12)
                    .count();
        }
    }
    Ok(violations)
}

/// Criterion 11: Stroock-Varopoulos inequality on 50 random fields.
pub fn stroock_varopoulos(seed: u64) -> Outcome {
    let s = 0.25;
    let grid = Grid1D::new(4.0, 512)?;
    let dx = grid.dx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let w = random_nonnegative_field(grid, &mut rng);
        for p in [2.0f64, 3.0] {
            for alpha in [1.0 - s, 2.0 - 2.0 * s] {
                let lap = frac_laplacian_with(&w, alpha, SpectralOptions::default())?;
                let lhs: f64 = w
                    .values()
                    .iter()
                    .zip(lap.values())
                    .map(|(x, l)| x.powf(p) * l)
                    .sum::<f64>()
                    * dx;
                let g = w.map(|x| x.powf(0.5 * (p + 1.0)));
                let rhs = 4.0 * p / (p + 1.0).powi(2) * homog_sobolev_norm(&g, alpha)?.powi(2);
                let scale = lhs.abs().max(rhs.abs());
                let margin = (lhs - rhs) / scale;
                worst = worst.min(margin);
                violations += usize::from(lhs < rhs - 1e-6 * scale);
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations in 200 evaluations; smallest relative margin {worst:.2e}"),
    ))
}

/// Criterion 12: `H_rel` trajectories converge as `epsilon -> 0`.
fn regularization_consistency(runs: &Runs) -> Outcome {
    let base = runs.absorption()?;
    let small = runs.regularized(1e-3)?;
    let large = runs.regularized(1e-2)?;
    let scale = entropy_scale(&base.config)?;
    let h = |r: &TimedRun| -> Vec<f64> { r.output.records.iter().map(|x| x.h_rel).collect() };
    let (h0, h3, h2) = (h(base), h(small), h(large));
    let mut max_gap = 0.0f64;
    let mut order_breaks = 0;
    for k in 0..h0.len() {
        let near = (h3[k] - h0[k]).abs();
        let far = (h2[k] - h0[k]).abs();
        max_gap = max_gap.max(near);
        order_breaks += usize::from(near > far + 1e-12 * scale);
    }
    Ok((
        order_breaks == 0 && max_gap <= 5e-2 * scale,
        format!(
            "max |H_rel(1e-3) - H_rel(0)| = {max_gap:.2e} (<= {:.2e}); outputs where the 1e-3 gap exceeds the 1e-2 gap: {order_breaks}",
            5e-2 * scale
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_parsing() {
        let empty = SuiteConfig::from_json_str("  \n").unwrap();
        assert!(empty.criteria.is_empty());
        let s = SuiteConfig::from_json_str(r#"{"criteria":[3],"profile_n":64}"#).unwrap();
        assert_eq!(s.criteria, vec![3]);
        assert_eq!(s.n, 2048);
        assert!(SuiteConfig::from_json_str(r#"{"criteria":[13]}"#).is_err());
        assert!(SuiteConfig::from_json_str(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn empty_suite_passes_with_warning() {
        let suite = SuiteConfig::from_json_str("").unwrap();
        let report = verify(&suite).unwrap();
        assert!(report.pass);
        assert!(report.criteria.is_empty());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn result_line_format() {
        let r = CriterionResult {
            id: 3,
            name: "x".into(),
            pass: false,
            detail: "d".into(),
            seconds: 0.25,
        };
        assert!(r.line().starts_with("FAIL [ 3] x: d"));
    }
}
