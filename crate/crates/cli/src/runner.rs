//! Parallel evaluation of a sweep on a rayon pool.
//!
//! Each point is a pure function of the configuration and results are
//! collected in index order, so output does not depend on the worker count.

use std::env;
use std::num::NonZeroUsize;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use tdgrating_core::gvv::envelope_omega_sq;
use tdgrating_core::sweep::{Backend, PreparedSweep, SweepConfig, SweepOutcome};
use tdgrating_core::units::mhz_to_angular;

use crate::csv::quantize;

pub const WORKERS_ENV: &str = "TDGRATING_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{WORKERS_ENV} must be a positive integer, got `{0}`")]
    Workers(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Core(#[from] tdgrating_core::Error),
}

/// Explicit request, else the environment variable, else available
/// parallelism.
pub fn worker_count(requested: Option<usize>) -> Result<usize, RunError> {
    if let Some(n) = requested {
        return if n > 0 { Ok(n) } else { Err(RunError::Workers(n.to_string())) };
    }
    match env::var(WORKERS_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or(RunError::Workers(raw)),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, NonZeroUsize::get)),
    }
}

/// Runs `config` on `workers` threads; grid values are quantized to the CSV
/// precision.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepOutcome, RunError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let mut outcome = pool.install(|| -> Result<SweepOutcome, RunError> {
        let prepared = match config.backend {
            Backend::Gvv => {
                let envelope = config
                    .delta_axis_mhz
                    .par_iter()
                    .map(|d| {
                        envelope_omega_sq(mhz_to_angular(*d), &config.params, &config.schedule, &config.solver.cutoffs)
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                PreparedSweep::with_envelope(config, envelope)?
            }
            _ => PreparedSweep::new(config)?,
        };
        let results = (0..prepared.points())
            .into_par_iter()
            .map(|i| prepared.evaluate(i))
            .collect();
        Ok(prepared.assemble(results)?)
    })?;
    for v in outcome.grid.values.iter_mut().flatten() {
        *v = quantize(*v);
    }
    Ok(outcome)
}

/// `SOURCE_DATE_EPOCH` when set, else the current time.
pub fn timestamp() -> String {
    env::var("SOURCE_DATE_EPOCH").ok().filter(|s| s.parse::<u64>().is_ok()).unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
            .to_string()
    })
}
