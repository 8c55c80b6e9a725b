//! Exponential decay-rate fits against the theoretical rates.

use crate::entropy::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::solver::{Equation, SolverConfig};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Default fit window in similarity time.
pub const DEFAULT_WINDOW: [f64; 2] = [1.0, 4.0];

/// Fraction of the theoretical rate a fit must reach to pass.
pub const PASS_FRACTION: f64 = 0.8;

/// Minimum number of samples in a fit window.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "H_rel")]
    HRel,
    #[serde(rename = "hneg_s_sq")]
    HnegSSq,
    #[serde(rename = "w2")]
    W2,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::HRel, Quantity::HnegSSq, Quantity::W2];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::HRel => "H_rel",
            Quantity::HnegSSq => "hneg_s_sq",
            Quantity::W2 => "w2",
        }
    }

    pub fn value(self, record: &DiagnosticsRecord) -> f64 {
        match self {
            Quantity::HRel => record.h_rel,
            Quantity::HnegSSq => record.hneg_s_sq,
            Quantity::W2 => record.w2,
        }
    }

    /// Power of `H_rel` that bounds this quantity: 1, except `1/2` for `w2`.
    pub fn power(self) -> f64 {
        match self {
            Quantity::W2 => 0.5,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown quantity {s:?}; expected H_rel, hneg_s_sq or w2"
                ))
            })
    }
}

/// Whether `log((1 + t)^2)` (scaled by the quantity's power) is removed
/// before the linear fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorMode {
    #[default]
    None,
    LogSquare,
}

impl PrefactorMode {
    fn correction(self, t: f64, power: f64) -> f64 {
        match self {
            PrefactorMode::None => 0.0,
            PrefactorMode::LogSquare => 2.0 * power * t.ln_1p(),
        }
    }
}

impl FromStr for PrefactorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PrefactorMode::None),
            "log_square" => Ok(PrefactorMode::LogSquare),
            _ => Err(Error::Config(format!(
                "unknown prefactor mode {s:?}; expected none or log_square"
            ))),
        }
    }
}

/// Result of a least-squares fit of `log(quantity) - correction = a + k t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub quantity: Quantity,
    pub fitted_exponent: f64,
    pub intercept: f64,
    /// times of the first and last fitted samples
    pub fit_window: [f64; 2],
    pub residual_rms: f64,
    pub theoretical_exponent: f64,
    pub prefactor_mode: PrefactorMode,
    pub points: usize,
}

impl RateFit {
    /// One-sided check `fitted <= PASS_FRACTION * theoretical` (both negative).
    pub fn passes(&self) -> bool {
        self.fitted_exponent <= PASS_FRACTION * self.theoretical_exponent
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            quantity: self.quantity,
            fitted_exponent: self.fitted_exponent,
            theoretical_exponent: self.theoretical_exponent,
            residual_rms: self.residual_rms,
            window: self.fit_window,
            prefactor_mode: self.prefactor_mode,
            pass: self.passes(),
        }
    }
}

/// Serialized form of a [`RateFit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub quantity: Quantity,
    pub fitted_exponent: f64,
    pub theoretical_exponent: f64,
    pub residual_rms: f64,
    pub window: [f64; 2],
    pub prefactor_mode: PrefactorMode,
    pub pass: bool,
}

/// Decay rate of `H_rel` predicted for the configured equation:
/// 2 (pure), `2 min(1, lambda delta)` (absorption), `2 min(1, lambda theta)` (convection).
pub fn theoretical_rate(config: &SolverConfig) -> Result<f64> {
    let lam = config.lambda();
    match config.equation {
        Equation::Pure => Ok(2.0),
        Equation::Absorption => {
            let delta = config
                .delta()
                .ok_or_else(|| Error::Config("absorption needs r".into()))?;
            if !(delta > 0.0) {
                return Err(Error::Regime(format!(
                    "absorption rate needs delta = (r-1)/lambda - 1 > 0, i.e. r > 4 - 2s; got delta = {delta}"
                )));
            }
            Ok(2.0 * (lam * delta).min(1.0))
        }
        Equation::Convection | Equation::ConvectionIntegrated => {
            let theta = config
                .theta()
                .ok_or_else(|| Error::Config("convection needs q".into()))?;
            if !(theta > 0.0) {
                return Err(Error::Regime(format!(
                    "convection rate needs theta = q/lambda - 1 > 0, i.e. q > 3 - 2s; got theta = {theta}"
                )));
            }
            Ok(2.0 * (lam * theta).min(1.0))
        }
    }
}

/// Least-squares fit of `log(quantity)` against `t` over `window`.
///
/// Samples are taken in time order from the start of the window; the first
/// value at or below `floor` (or nonpositive) ends the window.
pub fn fit_decay_rate(
    records: &[DiagnosticsRecord],
    quantity: Quantity,
    prefactor_mode: PrefactorMode,
    window: [f64; 2],
    floor: f64,
    theoretical_rate: f64,
) -> Result<RateFit> {
    let [t0, t1] = window;
    if !(t0 < t1) {
        return Err(Error::Fit(format!("empty fit window [{t0}, {t1}]")));
    }
    let slack = 1e-9 * t1.abs().max(1.0);
    let power = quantity.power();
    let mut pts = Vec::new();
    for r in records
        .iter()
        .filter(|r| r.t >= t0 - slack && r.t <= t1 + slack)
    {
        let value = quantity.value(r);
        if !(value > floor.max(0.0)) {
            log::info!(
                "{} = {value:e} at t = {} is below the floor {floor:e}; fit window ends",
                quantity,
                r.t
            );
            break;
        }
        pts.push((r.t, value.ln() - prefactor_mode.correction(r.t, power)));
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} positive samples of {} above the floor in [{t0}, {t1}], need {}",
            pts.len(),
            quantity,
            MIN_FIT_POINTS
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if stt <= 0.0 {
        return Err(Error::Fit("fit samples share one time".into()));
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let residual_rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        quantity,
        fitted_exponent: slope,
        intercept,
        fit_window: [pts[0].0, pts[pts.len() - 1].0],
        residual_rms,
        theoretical_exponent: -power * theoretical_rate,
        prefactor_mode,
        points: pts.len(),
    })
}
