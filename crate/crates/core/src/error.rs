use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order s = {0} outside (0, 1/2)")]
    InvalidOrder(f64),
    #[error("multiplier exponent alpha = {0} outside (0, 2]")]
    InvalidAlpha(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative density {value:e} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },
    #[error("mass mismatch: {left} vs {right} (relative tolerance {tol:e})")]
    MassMismatch { left: f64, right: f64, tol: f64 },
    #[error("not in the diffusion-dominated regime: {0}")]
    Regime(String),
    #[error("support escaped the domain: mass {outside:e} beyond |x| > {radius} (limit {limit:e}); enlarge L")]
    SupportEscape {
        outside: f64,
        radius: f64,
        limit: f64,
    },
    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("non-finite value encountered at step {step}")]
    NotFinite { step: usize },
    #[error("monotonicity lost at node {node}: {left:e} > {right:e}")]
    MonotonicityLoss { node: usize, left: f64, right: f64 },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command line tool: 2 for input
    /// validation problems, 3 for runtime aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SupportEscape { .. }
            | Error::NotFinite { .. }
            | Error::MonotonicityLoss { .. }
            | Error::CflViolation { .. }
            | Error::Io(_)
            | Error::Csv(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(s))
    }
}
