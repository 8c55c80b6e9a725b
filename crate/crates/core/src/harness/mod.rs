//! Experiments, decay-rate fits and the acceptance driver.

mod acceptance;
mod experiment;
mod fit;

pub use acceptance::{
    barenblatt_validity, comparison_violations, hermite_gaussian_field, integrated_cross_check,
    multiplier_consistency, oracle_equivalence, stroock_varopoulos, verify, CriterionResult,
    SuiteConfig, VerifyReport, ALL_CRITERIA,
};
pub use experiment::{
    analyze, count_violations, default_prefactor, entropy_scale, plot_script, read_csv,
    run_experiment, run_experiment_config, simulate, write_csv, Artifacts, ExperimentReport,
    InequalityCounts, CSV_NAME, FIT_FLOOR, INEQUALITY_TOLERANCE, PLOT_NAME, REPORT_NAME,
};
pub use fit::{
    fit_decay_rate, theoretical_rate, FitReport, PrefactorMode, Quantity, RateFit, DEFAULT_WINDOW,
    MIN_FIT_POINTS, PASS_FRACTION,
};

use crate::error::{Error, Result};

/// Environment variable capping the number of concurrent experiments.
pub const THREADS_ENV: &str = "FRACPME_THREADS";

/// Worker count from `FRACPME_THREADS`, or the available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}
