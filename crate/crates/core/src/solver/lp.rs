use crate::entropy::DiagnosticsRecord;
use crate::error::{Error, Result};

/// Physical-variable `‖u(tau)‖_p` from a similarity-variable record:
/// `‖u‖_p = e^{-(1 - 1/p) t} ‖rho‖_p`. Only `p ∈ {1, 2, ∞}` are recorded.
pub fn physical_norm(record: &DiagnosticsRecord, p: f64) -> Result<f64> {
    let (norm, exponent) = if p == 1.0 {
        (record.l1, 0.0)
    } else if p == 2.0 {
        (record.l2, 0.5)
    } else if p.is_infinite() && p > 0.0 {
        (record.linf, 1.0)
    } else {
        return Err(Error::InvalidParameter(format!(
            "only p = 1, 2, inf are recorded, got {p}"
        )));
    };
    Ok(norm * (-exponent * record.t).exp())
}

/// Diffusion-dominated decay exponent `-(p-1)/(p (3 - 2s))` of `‖u(tau)‖_p`.
pub fn expected_lp_slope(p: f64, s: f64) -> f64 {
    let frac = if p.is_infinite() { 1.0 } else { (p - 1.0) / p };
    -frac / (3.0 - 2.0 * s)
}

/// Least-squares slope of `log ‖u(tau)‖_p` against `log tau` over the last
/// decade of `tau` present in `records`.
pub fn lp_decay_check(records: &[DiagnosticsRecord], p: f64) -> Result<f64> {
    let tau_max = records.iter().map(|r| r.tau).fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.tau > 0.0 && r.tau >= 0.1 * tau_max)
        .map(|r| Ok((r.tau.ln(), physical_norm(r, p)?.ln())))
        .collect::<Result<_>>()?;
    if points.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples in the last decade of tau, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("degenerate tau samples".into()));
    }
    Ok(sxy / sxx)
}
