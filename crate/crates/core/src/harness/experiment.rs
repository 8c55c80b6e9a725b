//! Single experiments: run a configuration, write CSV, fit report and plot script.

use super::fit::{fit_decay_rate, theoretical_rate, FitReport, PrefactorMode, Quantity};
use crate::barenblatt::BarenblattProfile;
use crate::entropy::{DiagnosticsRecord, EntropyEvaluator};
use crate::error::Result;
use crate::frac_ops::RieszOperator;
use crate::integrated::IntegratedSolver;
use crate::solver::{Equation, RunOutput, Solver, SolverConfig};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Inequality tolerances are this multiple of [`entropy_scale`].
pub const INEQUALITY_TOLERANCE: f64 = 1e-3;

/// Fit samples at or below this multiple of [`entropy_scale`] end the fit window.
pub const FIT_FLOOR: f64 = 1e-10;

pub const CSV_NAME: &str = "diagnostics.csv";
pub const REPORT_NAME: &str = "fit_report.json";
pub const PLOT_NAME: &str = "plot.gp";

/// `|H[rho_M]|` for the profile of the initial mass, sampled on the run grid.
pub fn entropy_scale(config: &SolverConfig) -> Result<f64> {
    let grid = config.grid()?;
    let profile = BarenblattProfile::from_mass(config.initial_mass(), config.s)?;
    let rho = profile.sample_on_grid(&grid)?;
    let eval = EntropyEvaluator::new(RieszOperator::new(grid, config.s)?);
    Ok(eval.entropy(&rho)?.abs())
}

/// Runs the configuration with the finite-volume or the integrated solver.
pub fn simulate(config: &SolverConfig) -> Result<RunOutput> {
    match config.equation {
        Equation::ConvectionIntegrated => IntegratedSolver::new(config.clone())?.run(),
        _ => Solver::new(config.clone())?.run(),
    }
}

/// Number of logged steps violating each inequality by more than `tol`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityCounts {
    /// `H_rel <= I / 2`
    pub entropy_dissipation: usize,
    /// `hneg_s_sq <= 2 H_rel`
    pub hneg_s_sq: usize,
    /// `w2^2 <= 2 H_rel`
    pub w2: usize,
}

impl InequalityCounts {
    pub fn total(&self) -> usize {
        self.entropy_dissipation + self.hneg_s_sq + self.w2
    }
}

pub fn count_violations(records: &[DiagnosticsRecord], tol: f64) -> InequalityCounts {
    let mut counts = InequalityCounts::default();
    for r in records {
        let [a, b, c] = r.inequality_margins();
        counts.entropy_dissipation += usize::from(a < -tol);
        counts.hneg_s_sq += usize::from(b < -tol);
        counts.w2 += usize::from(c < -tol);
    }
    counts
}

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for r in rd.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

/// Gnuplot script drawing the decaying quantities and the mass from `csv_name`.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set logscale y\n\
         set format y '%.0e'\n\
         set terminal pngcairo size 900,600\n\
         set output 'decay.png'\n\
         plot '{csv_name}' using 1:9 with linespoints title 'H_rel', \\\n\
         \x20    '' using 1:10 with linespoints title 'hneg_s_sq', \\\n\
         \x20    '' using 1:11 with linespoints title 'w2', \\\n\
         \x20    '' using 1:8 with lines title 'I'\n\
         unset logscale y\n\
         set format y '%g'\n\
         set output 'mass.png'\n\
         plot '{csv_name}' using 1:3 with lines title 'mass'\n"
    )
}

/// Contents of the fit report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub theoretical_rate: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub fits: Vec<FitReport>,
    /// quantities whose fit could not be formed, with the reason
    pub fit_errors: Vec<String>,
    pub violations: InequalityCounts,
    pub m_infinity: f64,
}

/// Prefactor correction matching the decay bound for the equation.
pub fn default_prefactor(equation: Equation) -> PrefactorMode {
    match equation {
        Equation::Pure => PrefactorMode::None,
        _ => PrefactorMode::LogSquare,
    }
}

/// Fits every quantity and counts inequality violations for a finished run.
pub fn analyze(
    config: &SolverConfig,
    output: &RunOutput,
    window: [f64; 2],
) -> Result<ExperimentReport> {
    let rate = theoretical_rate(config)?;
    let scale = entropy_scale(config)?;
    let tolerance = INEQUALITY_TOLERANCE * scale;
    let mode = default_prefactor(config.equation);
    let mut fits = Vec::new();
    let mut fit_errors = Vec::new();
    for q in Quantity::ALL {
        let floor = FIT_FLOOR * scale.powf(q.power());
        match fit_decay_rate(&output.records, q, mode, window, floor, rate) {
            Ok(fit) => fits.push(fit.report()),
            Err(e) => fit_errors.push(format!("{q}: {e}")),
        }
    }
    Ok(ExperimentReport {
        theoretical_rate: rate,
        scale,
        tolerance,
        fits,
        fit_errors,
        violations: count_violations(&output.records, tolerance),
        m_infinity: output.m_infinity,
    })
}

/// Paths of the files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub plot: PathBuf,
    pub summary: ExperimentReport,
}

pub fn run_experiment(config_path: &Path, out_dir: &Path, window: [f64; 2]) -> Result<Artifacts> {
    let config = SolverConfig::from_path(config_path)?;
    run_experiment_config(&config, out_dir, window)
}

pub fn run_experiment_config(
    config: &SolverConfig,
    out_dir: &Path,
    window: [f64; 2],
) -> Result<Artifacts> {
    config.validate()?;
    theoretical_rate(config)?;
    let output = simulate(config)?;
    fs::create_dir_all(out_dir)?;
    let csv = out_dir.join(CSV_NAME);
    write_csv(&output.records, &csv)?;
    let summary = analyze(config, &output, window)?;
    let report = out_dir.join(REPORT_NAME);
    fs::write(&report, serde_json::to_string_pretty(&summary)?)?;
    let plot = out_dir.join(PLOT_NAME);
    fs::write(&plot, plot_script(CSV_NAME))?;
    Ok(Artifacts {
        csv,
        report,
        plot,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::DiagnosticsRecord;

    #[test]
    fn csv_header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rec = DiagnosticsRecord {
            t: 0.5,
            tau: 0.6,
            mass: 1.0,
            l1: 1.0,
            l2: 0.9,
            linf: 0.8,
            h: 0.7,
            i: 0.1,
            h_rel: 1e-3,
            hneg_s_sq: 2e-3,
            w2: 0.01,
            m2: 0.2,
            m2n: 0.05,
            min_density: 0.0,
            support_radius: 0.95,
        };
        write_csv(&[rec, rec], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            DiagnosticsRecord::COLUMNS.join(",")
        );
        assert_eq!(read_csv(&path).unwrap(), vec![rec, rec]);
    }

    #[test]
    fn violation_counts() {
        let mut rec: DiagnosticsRecord = serde_json::from_str(
            r#"{"t":0,"tau":0,"mass":1,"l1":1,"l2":1,"linf":1,"H":0,"I":1.0,"H_rel":0.1,
                "hneg_s_sq":0.1,"w2":0.1,"m2":0,"m2n":0,"min_density":0,"support_radius":1}"#,
        )
        .unwrap();
        assert_eq!(count_violations(&[rec], 0.0).total(), 0);
        rec.i = 0.1;
        rec.hneg_s_sq = 0.3;
        let c = count_violations(&[rec], 1e-3);
        assert_eq!((c.entropy_dissipation, c.hneg_s_sq, c.w2), (1, 1, 0));
    }

    #[test]
    fn plot_script_references_csv() {
        let s = plot_script("run.csv");
        assert!(s.contains("'run.csv' using 1:9"));
        assert_eq!(DiagnosticsRecord::COLUMNS[8], "H_rel");
        assert_eq!(DiagnosticsRecord::COLUMNS[7], "I");
    }
}
