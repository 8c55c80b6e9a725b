#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Parser, Subcommand};
use fracpme::barenblatt::BarenblattProfile;
use fracpme::frac_ops::RieszOperator;
use fracpme::harness::{
    default_prefactor, fit_decay_rate, read_csv, run_experiment, theoretical_rate, verify,
    PrefactorMode, Quantity, SuiteConfig, DEFAULT_WINDOW,
};
use fracpme::solver::SolverConfig;
use fracpme::{Error, Field, Result};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracpme",
    version,
    about = "Nonlocal porous medium equation with fractional pressure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write diagnostics CSV, fit report and gnuplot script.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// fit window `t0,t1` in similarity time
        #[arg(long, value_parser = parse_window)]
        window: Option<[f64; 2]>,
    },
    /// Sample the Barenblatt profile for the configured mass and check its Euler-Lagrange relation.
    Profile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the acceptance suite (all criteria without --config).
    Verify {
        /// suite file selecting criteria and resolutions
        #[arg(long)]
        config: Option<PathBuf>,
        /// write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit an exponential decay rate to a diagnostics CSV.
    FitRate {
        /// diagnostics CSV written by `simulate`
        csv: PathBuf,
        /// configuration that produced the CSV (for the theoretical rate)
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "H_rel")]
        quantity: Quantity,
        #[arg(long, value_parser = parse_window)]
        window: Option<[f64; 2]>,
        /// `none` or `log_square`; defaults to the equation's decay bound
        #[arg(long)]
        prefactor: Option<PrefactorMode>,
        /// write the JSON fit report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_window(text: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected t0,t1, got {text:?}"));
    }
    let t0: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let t1: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    if !(t0 < t1) {
        return Err(format!("window start {t0} must be below its end {t1}"));
    }
    Ok([t0, t1])
}

fn print_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn profile(config: &Path, out: &Path) -> Result<()> {
    let cfg = SolverConfig::from_path(config)?;
    cfg.validate()?;
    let grid = cfg.grid()?;
    let prof = BarenblattProfile::from_mass(cfg.initial_mass(), cfg.s)?;
    let rho = prof.sample_on_grid(&grid)?;
    let op = RieszOperator::new(grid, cfg.s)?;
    let potential = op.apply(&rho)?;
    let residual = prof.euler_lagrange_residual_with(&op)?;
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("profile.csv"))?;
    w.write_record(["x", "rho", "pressure_plus_confinement"])?;
    let xs = grid.centers();
    for ((x, r), p) in xs.iter().zip(rho.values()).zip(potential.values()) {
        w.write_record([x.to_string(), r.to_string(), (p + 0.5 * x * x).to_string()])?;
    }
    w.flush()?;
    let summary = serde_json::json!({
        "s": cfg.s,
        "mass": prof.mass(),
        "radius": prof.radius(),
        "prefactor": prof.prefactor(),
        "el_constant": prof.el_constant(),
        "sampled_mass": Field::mass(&rho),
        "interior_residual": residual.interior_sup,
        "exterior_margin": residual.exterior_min,
    });
    print_json(&summary, None)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            window,
        } => {
            let art = run_experiment(&config, &out, window.unwrap_or(DEFAULT_WINDOW))?;
            print_json(&art.summary, None)?;
            log::info!(
                "wrote {}, {}, {}",
                art.csv.display(),
                art.report.display(),
                art.plot.display()
            );
        }
        Command::Profile { config, out } => profile(&config, &out)?,
        Command::Verify { config, out } => {
            let suite = match config {
                Some(path) => SuiteConfig::from_path(&path)?,
                None => SuiteConfig::default(),
            };
            let report = verify(&suite)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            print_json(&report, out.as_deref())?;
            if !report.pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::FitRate {
            csv,
            config,
            quantity,
            window,
            prefactor,
            out,
        } => {
            let cfg = SolverConfig::from_path(&config)?;
            let rate = theoretical_rate(&cfg)?;
            let records = read_csv(&csv)?;
            let fit = fit_decay_rate(
                &records,
                quantity,
                prefactor.unwrap_or_else(|| default_prefactor(cfg.equation)),
                window.unwrap_or(DEFAULT_WINDOW),
                0.0,
                rate,
            )?;
            print_json(&fit.report(), out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
