//! Closed-form time-domain grating model.
//!
//! Each modulation period acts as one slit: a single-slit factor
//! [`diffraction`] multiplies an `N`-slit factor [`interference`]. The model
//! is dissipationless; finite coherence enters only through the slit count.

use crate::params::{DriveSchedule, QutritParams, Scheme};
use crate::phases::period_phases;
use crate::units::angular_to_mhz;
use crate::{Error, PhaseTriple, Result};

/// `|sin 2x|` below which the interference factor takes its limit value.
pub const SINGULAR_SIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingConfig {
    pub n_slits: u32,
    pub period_phases: PhaseTriple,
}

impl GratingConfig {
    pub fn new(params: &QutritParams, schedule: &DriveSchedule, n_slits: u32) -> Result<Self> {
        if n_slits < 1 {
            return Err(Error::invalid("n_slits", "need at least one slit"));
        }
        Ok(GratingConfig {
            n_slits,
            period_phases: period_phases(params, schedule)?,
        })
    }
}

/// `sin^2 x / x^2`, equal to 1 at `x = 0`.
pub fn diffraction(x: f64) -> f64 {
    if libm::fabs(x) < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0
    } else {
        let s = libm::sin(x) / x;
        s * s
    }
}

/// `sin^2(2Nx) / sin^2(2x)`, equal to `N^2` where `sin 2x = 0`.
pub fn interference(x: f64, n_slits: u32) -> f64 {
    let n = f64::from(n_slits);
    let s = libm::sin(2.0 * x);
    if libm::fabs(s) < SINGULAR_SIN {
        return n * n;
    }
    let num = libm::sin(2.0 * n * x);
    (num * num) / (s * s)
}

/// Slit count `round(1 / (Gamma tau))` with `Gamma` the total coherence decay
/// in linear MHz; at least 1.
pub fn default_slit_count(params: &QutritParams, schedule: &DriveSchedule) -> u32 {
    let gamma_lin = angular_to_mhz(params.total_gamma());
    if !(gamma_lin > 0.0) {
        return 1;
    }
    let n = libm::round(1.0 / (gamma_lin * schedule.tau()));
    if n < 1.0 {
        1
    } else if n > f64::from(u32::MAX) {
        u32::MAX
    } else {
        n as u32
    }
}

/// Two gratings, one per dressed state, for simultaneous modulation.
pub fn modulated_at_signal(params: &QutritParams, schedule: &DriveSchedule, n_slits: u32) -> Result<f64> {
    require(schedule, Scheme::Simultaneous, "modulated_at_signal")?;
    let cfg = GratingConfig::new(params, schedule, n_slits)?;
    let PhaseTriple { theta_p: p, theta_q: q, .. } = cfg.period_phases;
    Ok(diffraction((3.0 * p - q) / 8.0) * interference(p / 4.0, n_slits)
        + diffraction((3.0 * q - p) / 8.0) * interference(q / 4.0, n_slits))
}

/// Shared envelope `D(theta_3 / 8)` over both interference ladders, for
/// complementary modulation.
pub fn mid_signal(params: &QutritParams, schedule: &DriveSchedule, n_slits: u32) -> Result<f64> {
    require(schedule, Scheme::Complementary, "mid_signal")?;
    let cfg = GratingConfig::new(params, schedule, n_slits)?;
    let ph = cfg.period_phases;
    Ok(mid_envelope(&ph) * (interference(ph.theta_p / 4.0, n_slits) + interference(ph.theta_q / 4.0, n_slits)))
}

/// `D(theta_3 / 8)`.
pub fn mid_envelope(phases: &PhaseTriple) -> f64 {
    diffraction(phases.theta_3 / 8.0)
}

fn require(schedule: &DriveSchedule, scheme: Scheme, operation: &'static str) -> Result<()> {
    if schedule.scheme() != scheme {
        return Err(Error::UnsupportedScheme {
            operation,
            scheme: schedule.scheme(),
        });
    }
    Ok(())
}
