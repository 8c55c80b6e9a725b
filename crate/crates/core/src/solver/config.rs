use crate::barenblatt::{lambda, radius_from_mass};
use crate::error::{check_order, Error, Result};
use crate::frac_ops::Frame;
use crate::grid::Grid1D;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// `rho_t = (rho (p_x + x))_x`
    Pure,
    /// adds `-P(t)^{-delta} rho^r`
    Absorption,
    /// adds `-P(t)^{-theta} b (rho^q)_x`
    Convection,
    /// convection evolved through the cumulative mass `v = ∫_{-inf}^x u`
    ConvectionIntegrated,
}

/// Initial density, normalized to `mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    Box {
        mass: f64,
        #[serde(default)]
        center: f64,
        half_width: f64,
    },
    Gaussian {
        mass: f64,
        #[serde(default)]
        center: f64,
        sigma: f64,
        /// truncation radius in units of `sigma`
        #[serde(default = "default_cutoff")]
        cutoff: f64,
    },
    /// `rho_M (1 + amplitude * exp(-(x - center)^2 / (2 width^2)))`, renormalized.
    PerturbedBarenblatt {
        mass: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// Sum of `count` Gaussian bumps with positions and widths drawn from `seed`.
    RandomBumps {
        mass: f64,
        count: usize,
        /// bumps are centered in `[-spread, spread]`
        spread: f64,
    },
}

fn default_cutoff() -> f64 {
    4.0
}

fn default_width() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn mass(&self) -> f64 {
        match *self {
            InitialCondition::Box { mass, .. }
            | InitialCondition::Gaussian { mass, .. }
            | InitialCondition::PerturbedBarenblatt { mass, .. }
            | InitialCondition::RandomBumps { mass, .. } => mass,
        }
    }

    /// Half-width of an interval containing the initial support.
    pub fn extent(&self, s: f64) -> Result<f64> {
        Ok(match *self {
            InitialCondition::Box {
                center, half_width, ..
            } => center.abs() + half_width,
            InitialCondition::Gaussian {
                center,
                sigma,
                cutoff,
                ..
            } => center.abs() + cutoff * sigma,
            InitialCondition::PerturbedBarenblatt { mass, .. } => radius_from_mass(mass, s)?,
            InitialCondition::RandomBumps { spread, .. } => spread * 1.5,
        })
    }
}

fn default_b() -> f64 {
    1.0
}

fn default_moment_order() -> u32 {
    4
}

/// Simulation parameters; the JSON keys match the field names (`L` for the half width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub equation: Equation,
    #[serde(default)]
    pub frame: Frame,
    pub s: f64,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default)]
    pub epsilon: f64,
    /// Domain half width; defaults to `4 R(M_0)`.
    #[serde(rename = "L", default)]
    pub half_width: Option<f64>,
    pub n: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub output_every: f64,
    pub initial: InitialCondition,
    #[serde(default)]
    pub seed: u64,
    /// Order `2n` of the tracked higher moment.
    #[serde(default = "default_moment_order")]
    pub moment_order: u32,
}

impl SolverConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: SolverConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    pub fn lambda(&self) -> f64 {
        lambda(self.s)
    }

    /// `delta = (r - 1)/lambda - 1`.
    pub fn delta(&self) -> Option<f64> {
        self.r.map(|r| (r - 1.0) / self.lambda() - 1.0)
    }

    /// `theta = q/lambda - 1`.
    pub fn theta(&self) -> Option<f64> {
        self.q.map(|q| q / self.lambda() - 1.0)
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial.mass()
    }

    pub fn resolved_half_width(&self) -> Result<f64> {
        match self.half_width {
            Some(l) => Ok(l),
            None => Ok(4.0 * radius_from_mass(self.initial_mass(), self.s)?),
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.resolved_half_width()?, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.s)?;
        let cfg = |msg: String| Err(Error::Config(msg));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return cfg(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return cfg(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.output_every > 0.0 && self.output_every <= self.t_end) {
            return cfg(format!(
                "output_every must lie in (0, t_end], got {}",
                self.output_every
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return cfg(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        if self.moment_order < 2 || !self.moment_order.is_multiple_of(2) {
            return cfg(format!(
                "moment_order must be even, got {}",
                self.moment_order
            ));
        }
        if !(self.initial_mass() > 0.0) {
            return cfg(format!(
                "initial mass must be positive, got {}",
                self.initial_mass()
            ));
        }
        let l = self.resolved_half_width()?;
        if self.initial.extent(self.s)? >= 0.8 * l {
            return cfg(format!(
                "initial support {} does not fit inside 0.8 L = {}",
                self.initial.extent(self.s)?,
                0.8 * l
            ));
        }
        Grid1D::new(l, self.n)?;
        let lam = self.lambda();
        match self.equation {
            Equation::Pure => {}
            Equation::Absorption => {
                let r = self
                    .r
                    .ok_or_else(|| Error::Config("absorption needs r".into()))?;
                let delta = self.delta().unwrap();
                if !(delta > 0.0) {
                    return Err(Error::Regime(format!(
                        "absorption requires delta = (r-1)/lambda - 1 > 0, i.e. r > 4 - 2s = {}; got r = {r} (delta = {delta})",
                        4.0 - 2.0 * self.s
                    )));
                }
            }
            Equation::Convection | Equation::ConvectionIntegrated => {
                let q = self
                    .q
                    .ok_or_else(|| Error::Config("convection needs q".into()))?;
                let theta = self.theta().unwrap();
                if !(theta > 0.0) {
                    return Err(Error::Regime(format!(
                        "convection requires theta = q/lambda - 1 > 0, i.e. q > 3 - 2s = {lam}; got q = {q} (theta = {theta})"
                    )));
                }
                if self.equation == Equation::ConvectionIntegrated && self.frame != Frame::Physical
                {
                    return cfg("convection_integrated runs in the physical frame".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> &'static str {
        r#"{"equation":"absorption","frame":"similarity","s":0.25,"r":4.0,"epsilon":0.0,
            "L":4.0,"n":256,"cfl":0.4,"t_end":1.0,"output_every":0.1,
            "initial":{"type":"box","mass":1.0,"half_width":0.5},"seed":7}"#
    }

    #[test]
    fn parses_and_derives_exponents() {
        let c = SolverConfig::from_json_str(base()).unwrap();
        assert!((c.lambda() - 2.5).abs() < 1e-15);
        assert!((c.delta().unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(c.b, 1.0);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn rejects_subcritical_absorption() {
        let text = base().replace("\"r\":4.0", "\"r\":3.0");
        let err = SolverConfig::from_json_str(&text).unwrap_err();
        assert!(matches!(err, Error::Regime(_)), "{err}");
        assert!(err.to_string().contains("r > 4 - 2s"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_subcritical_convection() {
        let text = base()
            .replace("\"absorption\"", "\"convection\"")
            .replace("\"r\":4.0", "\"q\":2.4");
        assert!(matches!(
            SolverConfig::from_json_str(&text),
            Err(Error::Regime(_))
        ));
        let ok = text.replace("\"q\":2.4", "\"q\":3.0");
        let c = SolverConfig::from_json_str(&ok).unwrap();
        assert!((c.theta().unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_and_unknown_keys() {
        assert!(matches!(
            SolverConfig::from_json_str("{"),
            Err(Error::Config(_))
        ));
        let text = base().replace("\"seed\":7", "\"seed\":7,\"bogus\":1");
        assert!(SolverConfig::from_json_str(&text).is_err());
        let text = base().replace("\"cfl\":0.4", "\"cfl\":1.5");
        assert!(SolverConfig::from_json_str(&text).is_err());
    }

    #[test]
    fn default_domain_is_four_radii() {
        let text = base().replace("\"L\":4.0,", "");
        let c = SolverConfig::from_json_str(&text).unwrap();
        let r = radius_from_mass(1.0, 0.25).unwrap();
        assert!((c.resolved_half_width().unwrap() - 4.0 * r).abs() < 1e-14);
    }
}
