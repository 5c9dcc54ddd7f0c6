//! Two-dimensional spectra over detuning and control strength, evaluated by
//! any backend, plus the analysis used to compare backends.
//!
//! Evaluation is split so callers can parallelize: [`PreparedSweep`] is
//! immutable and `Sync`, [`PreparedSweep::evaluate`] handles one grid point,
//! and [`PreparedSweep::assemble`] turns per-point results (in index order)
//! into a grid. [`sweep`] runs the three steps sequentially.

mod compare;
mod fit;
mod peaks;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use compare::{compare, CompareReport, PeakMatching, RowComparison};
pub use fit::{fit_lorentzian, lorentzian, PeakFit, FLAG_RELATIVE_RMS};
pub use peaks::{find_peaks, smoothed_argmax, Peak};

use crate::gvv::{default_environment_damping, GvvCutoffs, GvvSpectrum};
use crate::lindblad::{steady_state_signal, SteadyStateOptions};
use crate::params::{DriveSchedule, QutritParams, Scheme};
use crate::units::{angular_to_mhz, dbm_to_rabi, mhz_to_angular, us_to_ns};
use crate::{floquet, grating, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Master-equation steady state.
    Lindblad,
    /// Dissipationless Floquet time average.
    Floquet,
    /// Effective-Hamiltonian Lorentzian ladders.
    Gvv,
    /// Closed-form grating formulas.
    Analytic,
}

impl Backend {
    pub const ALL: [Backend; 4] = [Backend::Lindblad, Backend::Floquet, Backend::Gvv, Backend::Analytic];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Lindblad => "lindblad",
            Backend::Floquet => "floquet",
            Backend::Gvv => "gvv",
            Backend::Analytic => "analytic",
        }
    }

    pub fn supports(self, scheme: Scheme) -> bool {
        match self {
            Backend::Lindblad => true,
            Backend::Floquet | Backend::Analytic => scheme.is_modulated(),
            Backend::Gvv => scheme == Scheme::Complementary,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::invalid("backend", "expected lindblad, floquet, gvv or analytic"))
    }
}

/// Meaning of the control axis values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlKind {
    /// Linear Rabi strength in MHz.
    RabiMhz,
    /// Microwave power in dBm.
    PowerDbm,
}

impl ControlKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlKind::RabiMhz => "rabi_mhz",
            ControlKind::PowerDbm => "power_dbm",
        }
    }

    /// Axis value to angular control strength.
    pub fn to_angular(self, value: f64) -> f64 {
        match self {
            ControlKind::RabiMhz => mhz_to_angular(value),
            ControlKind::PowerDbm => dbm_to_rabi(value),
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rabi_mhz" => Ok(ControlKind::RabiMhz),
            "power_dbm" => Ok(ControlKind::PowerDbm),
            _ => Err(Error::invalid("control_kind", "expected rabi_mhz or power_dbm")),
        }
    }
}

/// Signal over (control, detuning); row `r` holds the detuning scan at
/// `control_axis[r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    /// Probe detuning in MHz, strictly increasing.
    pub delta_axis: Vec<f64>,
    pub control_kind: ControlKind,
    /// Strictly monotonic.
    pub control_axis: Vec<f64>,
    /// Row-major, `None` where evaluation failed.
    pub values: Vec<Option<f64>>,
    pub meta: Vec<(String, String)>,
}

impl SpectrumGrid {
    pub fn new(
        delta_axis: Vec<f64>,
        control_kind: ControlKind,
        control_axis: Vec<f64>,
        values: Vec<Option<f64>>,
        meta: Vec<(String, String)>,
    ) -> Result<Self> {
        let grid = SpectrumGrid {
            delta_axis,
            control_kind,
            control_axis,
            values,
            meta,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_axis.is_empty() || self.control_axis.is_empty() {
            return Err(Error::invalid("axis", "axes must be non-empty"));
        }
        if self.delta_axis.iter().chain(&self.control_axis).any(|v| !v.is_finite()) {
            return Err(Error::invalid("axis", "axis values must be finite"));
        }
        if self.delta_axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("delta_axis", "must be strictly increasing"));
        }
        let increasing = self.control_axis.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.control_axis.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("control_axis", "must be strictly monotonic"));
        }
        if self.values.len() != self.rows() * self.cols() {
            return Err(Error::invalid("values", "length must equal rows * columns"));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "present values must be finite"));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.control_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.delta_axis.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let c = self.cols();
        &self.values[row * c..(row + 1) * c]
    }

    /// Row values, or `None` if any point is missing.
    pub fn row_complete(&self, row: usize) -> Option<Vec<f64>> {
        self.row(row).iter().copied().collect()
    }

    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.iter().flatten().copied().reduce(f64::max)
    }

    /// Divides by the grid maximum; returns the factor applied, or `None`
    /// (leaving values untouched) when the maximum is not positive.
    pub fn normalize(&mut self) -> Option<f64> {
        let max = self.max_value()?;
        if !(max > 0.0) {
            return None;
        }
        for v in self.values.iter_mut().flatten() {
            *v /= max;
        }
        Some(1.0 / max)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set_meta(&mut self, key: &str, value: String) {
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }
}

/// Backend knobs; each backend reads only its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub steady: SteadyStateOptions,
    /// Floquet photon cutoff.
    pub n_c: usize,
    pub cutoffs: GvvCutoffs,
    /// Environmental damping (angular); `None` means half the total decay.
    pub gamma_d: Option<f64>,
    /// Grating slit count; `None` means `round(1 / (Gamma tau))`.
    pub n_slits: Option<u32>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            steady: SteadyStateOptions::default(),
            n_c: 40,
            cutoffs: GvvCutoffs::default(),
            gamma_d: None,
            n_slits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub backend: Backend,
    /// Rates and probe strength; detuning and control are set per point.
    pub params: QutritParams,
    pub schedule: DriveSchedule,
    pub delta_axis_mhz: Vec<f64>,
    pub control_kind: ControlKind,
    pub control_axis: Vec<f64>,
    pub solver: SolverOptions,
    pub normalize: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.backend.supports(self.schedule.scheme()) {
            return Err(Error::UnsupportedScheme {
                operation: self.backend.as_str(),
                scheme: self.schedule.scheme(),
            });
        }
        self.params.validate()?;
        SpectrumGrid::new(
            self.delta_axis_mhz.clone(),
            self.control_kind,
            self.control_axis.clone(),
            alloc::vec![None; self.delta_axis_mhz.len() * self.control_axis.len()],
            Vec::new(),
        )?;
        if self.backend == Backend::Floquet && self.solver.n_c < 1 {
            return Err(Error::invalid("n_c", "cutoff must be at least 1"));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.delta_axis_mhz.len() * self.control_axis.len()
    }

    pub fn gamma_d(&self) -> f64 {
        self.solver.gamma_d.unwrap_or_else(|| default_environment_damping(&self.params))
    }

    pub fn n_slits(&self) -> u32 {
        self.solver
            .n_slits
            .unwrap_or_else(|| grating::default_slit_count(&self.params, &self.schedule))
    }

    /// Parameters at grid point `index` (row-major).
    pub fn point_params(&self, index: usize) -> QutritParams {
        let cols = self.delta_axis_mhz.len();
        let (row, col) = (index / cols, index % cols);
        self.params
            .with_delta(mhz_to_angular(self.delta_axis_mhz[col]))
            .with_control(self.control_kind.to_angular(self.control_axis[row]))
    }

    /// Provenance entries describing this configuration.
    pub fn meta(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let mut meta = alloc::vec![
            ("backend".to_string(), self.backend.to_string()),
            ("scheme".to_string(), self.schedule.scheme().to_string()),
            ("tau_ns".to_string(), format!("{}", us_to_ns(self.schedule.tau()))),
            ("probe_mhz".to_string(), format!("{}", angular_to_mhz(p.omega_p))),
            ("gamma_10_mhz".to_string(), format!("{}", angular_to_mhz(p.gamma_10))),
            ("gamma_21_mhz".to_string(), format!("{}", angular_to_mhz(p.gamma_21))),
            ("gamma_11_mhz".to_string(), format!("{}", angular_to_mhz(p.gamma_11))),
            ("gamma_22_mhz".to_string(), format!("{}", angular_to_mhz(p.gamma_22))),
        ];
        match self.backend {
            Backend::Lindblad => {
                let s = &self.solver.steady;
                let dt = s.dt.unwrap_or(self.schedule.tau() / crate::lindblad::STEPS_PER_PERIOD as f64);
                meta.push(("dt_ns".to_string(), format!("{}", us_to_ns(dt))));
                meta.push(("tol".to_string(), format!("{}", s.tol)));
                meta.push(("max_periods".to_string(), format!("{}", s.max_periods)));
            }
            Backend::Floquet => meta.push(("n_c".to_string(), format!("{}", self.solver.n_c))),
            Backend::Gvv => {
                meta.push(("gamma_d_mhz".to_string(), format!("{}", angular_to_mhz(self.gamma_d()))));
                meta.push(("q_max".to_string(), format!("{}", self.solver.cutoffs.q_max)));
            }
            Backend::Analytic => meta.push(("n_slits".to_string(), format!("{}", self.n_slits()))),
        }
        meta
    }
}

/// Value at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    /// False when an iterative backend stopped before settling.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub row: usize,
    pub col: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub grid: SpectrumGrid,
    pub failures: Vec<PointFailure>,
    /// `(row, col)` of points whose value did not settle.
    pub unconverged: Vec<(usize, usize)>,
}

impl SweepOutcome {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty() && self.unconverged.is_empty()
    }
}

/// Validated configuration plus any tables shared by all points.
#[derive(Debug, Clone)]
pub struct PreparedSweep {
    config: SweepConfig,
    gvv: Option<GvvSpectrum>,
}

impl PreparedSweep {
    pub fn new(config: &SweepConfig) -> Result<Self> {
        config.validate()?;
        let gvv = match config.backend {
            Backend::Gvv => {
                let axis: Vec<f64> = config.delta_axis_mhz.iter().map(|d| mhz_to_angular(*d)).collect();
                Some(GvvSpectrum::new(
                    &axis,
                    &config.params,
                    &config.schedule,
                    config.gamma_d(),
                    &config.solver.cutoffs,
                )?)
            }
            _ => None,
        };
        Ok(PreparedSweep { config: config.clone(), gvv })
    }

    /// As [`PreparedSweep::new`] with the GVV envelope already evaluated at
    /// every detuning (ignored by other backends).
    pub fn with_envelope(config: &SweepConfig, omega_sq: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let gvv = match config.backend {
            Backend::Gvv => {
                let axis: Vec<f64> = config.delta_axis_mhz.iter().map(|d| mhz_to_angular(*d)).collect();
                Some(GvvSpectrum::from_envelope(axis, omega_sq, &config.schedule, config.gamma_d())?)
            }
            _ => None,
        };
        Ok(PreparedSweep { config: config.clone(), gvv })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    pub fn points(&self) -> usize {
        self.config.points()
    }

    /// Evaluates grid point `index` (row-major).
    pub fn evaluate(&self, index: usize) -> Result<PointValue> {
        let cfg = &self.config;
        let params = cfg.point_params(index);
        let exact = |value: f64| PointValue { value, converged: true };
        match cfg.backend {
            Backend::Lindblad => {
                let r = steady_state_signal(&params, &cfg.schedule, &cfg.solver.steady)?;
                Ok(PointValue {
                    value: r.signal,
                    converged: r.converged,
                })
            }
            Backend::Floquet => floquet::floquet_signal(&params, &cfg.schedule, cfg.solver.n_c).map(exact),
            Backend::Gvv => {
                let table = self.gvv.as_ref().expect("prepared for gvv");
                Ok(exact(table.value(index % cfg.delta_axis_mhz.len(), params.omega_c)))
            }
            Backend::Analytic => {
                let n = cfg.n_slits();
                match cfg.schedule.scheme() {
                    Scheme::Simultaneous => grating::modulated_at_signal(&params, &cfg.schedule, n).map(exact),
                    _ => grating::mid_signal(&params, &cfg.schedule, n).map(exact),
                }
            }
        }
    }

    /// Builds the grid from per-point results given in index order.
    pub fn assemble(&self, results: Vec<Result<PointValue>>) -> Result<SweepOutcome> {
        if results.len() != self.points() {
            return Err(Error::invalid("results", "need one result per grid point"));
        }
        let cols = self.config.delta_axis_mhz.len();
        let mut values = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        let mut unconverged = Vec::new();
        for (index, result) in results.into_iter().enumerate() {
            let (row, col) = (index / cols, index % cols);
            match result {
                Ok(point) if point.value.is_finite() => {
                    if !point.converged {
                        unconverged.push((row, col));
                    }
                    values.push(Some(point.value));
                }
                Ok(_) => {
                    failures.push(PointFailure {
                        row,
                        col,
                        error: Error::invalid("value", "backend produced a non-finite value"),
                    });
                    values.push(None);
                }
                Err(error) => {
                    failures.push(PointFailure { row, col, error });
                    values.push(None);
                }
            }
        }
        let mut grid = SpectrumGrid::new(
            self.config.delta_axis_mhz.clone(),
            self.config.control_kind,
            self.config.control_axis.clone(),
            values,
            self.config.meta(),
        )?;
        let normalization = if self.config.normalize {
            match grid.normalize() {
                Some(a) => format!("grid-max (A = {a:e})"),
                None => "skipped (no positive value)".to_string(),
            }
        } else {
            "none".to_string()
        };
        grid.set_meta("normalization", normalization);
        grid.set_meta("missing_points", format!("{}", failures.len()));
        grid.set_meta("unconverged_points", format!("{}", unconverged.len()));
        Ok(SweepOutcome {
            grid,
            failures,
            unconverged,
        })
    }
}

/// Sequential sweep.
pub fn sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    let prepared = PreparedSweep::new(config)?;
    let results = (0..prepared.points()).map(|i| prepared.evaluate(i)).collect();
    prepared.assemble(results)
}

/// Evenly spaced `count` values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}
