//! Phases accumulated by the ground state and the two dressed states.
//!
//! `theta_3` is always evaluated as `2 * delta * t`, so it is bit-identical
//! for every control strength; `theta_p + theta_q` reproduces it up to
//! rounding of the two partial phases.

use crate::params::{DriveSchedule, QutritParams};
use crate::{Error, Result};

/// Absolute phases of the ground state and the two dressed states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPhases {
    pub ground: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Dressed-state phases relative to the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTriple {
    pub theta_p: f64,
    pub theta_q: f64,
    pub theta_3: f64,
}

impl PhaseTriple {
    /// `theta_p = a - b`, `theta_q = a + b`, `theta_3 = 2a`.
    fn split(common: f64, half_gap: f64) -> Self {
        PhaseTriple {
            theta_p: common - half_gap,
            theta_q: common + half_gap,
            theta_3: 2.0 * common,
        }
    }
}

pub fn level_phases(params: &QutritParams, t: f64) -> LevelPhases {
    LevelPhases {
        ground: -0.5 * params.delta * t,
        lower: 0.5 * (params.delta - params.omega_c) * t,
        upper: 0.5 * (params.delta + params.omega_c) * t,
    }
}

pub fn relative_phases(params: &QutritParams, t: f64) -> PhaseTriple {
    PhaseTriple::split(params.delta * t, 0.5 * params.omega_c * t)
}

/// Phases accumulated over one period; the control acts for half of it.
pub fn period_phases(params: &QutritParams, schedule: &DriveSchedule) -> Result<PhaseTriple> {
    if !schedule.scheme().is_modulated() {
        return Err(Error::UnsupportedScheme {
            operation: "period_phases",
            scheme: schedule.scheme(),
        });
    }
    let tau = schedule.tau();
    Ok(PhaseTriple::split(params.delta * tau, 0.25 * params.omega_c * tau))
}
