//! Strict `key = value` run configuration.
//!
//! Every key belongs to one section (`drive`, `grid`, `solver`, `output`) and
//! may appear either before any header or under its own section. Unknown keys,
//! keys under the wrong section and repeated keys are errors.

use std::fmt;
use std::path::PathBuf;

use tdgrating_core::gvv::GvvCutoffs;
use tdgrating_core::lindblad::{SteadyStateOptions, STEPS_PER_PERIOD};
use tdgrating_core::params::{DriveSchedule, QutritParams, Scheme, MEASURED_RATES_MHZ};
use tdgrating_core::sweep::{linspace, Backend, ControlKind, SolverOptions, SweepConfig};
use tdgrating_core::units::{dbm_to_rabi, mhz_to_angular, ns_to_us};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {key}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the offending value is a default.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Count,
    Bool,
    Text,
}

struct KeySpec {
    name: &'static str,
    section: &'static str,
    kind: Kind,
}

const fn key(name: &'static str, section: &'static str, kind: Kind) -> KeySpec {
    KeySpec { name, section, kind }
}

const KEYS: &[KeySpec] = &[
    key("backend", "drive", Kind::Text),
    key("scheme", "drive", Kind::Text),
    key("tau_ns", "drive", Kind::Float),
    key("probe_dbm", "drive", Kind::Float),
    key("probe_mhz", "drive", Kind::Float),
    key("gamma_10_mhz", "drive", Kind::Float),
    key("gamma_21_mhz", "drive", Kind::Float),
    key("gamma_11_mhz", "drive", Kind::Float),
    key("gamma_22_mhz", "drive", Kind::Float),
    key("gamma_d_mhz", "drive", Kind::Float),
    key("delta_start_mhz", "grid", Kind::Float),
    key("delta_stop_mhz", "grid", Kind::Float),
    key("delta_count", "grid", Kind::Count),
    key("control_kind", "grid", Kind::Text),
    key("control_start", "grid", Kind::Float),
    key("control_stop", "grid", Kind::Float),
    key("control_count", "grid", Kind::Count),
    key("dt_ns", "solver", Kind::Float),
    key("tol", "solver", Kind::Float),
    key("max_periods", "solver", Kind::Count),
    key("n_c", "solver", Kind::Count),
    key("q_max", "solver", Kind::Count),
    key("n_slits", "solver", Kind::Count),
    key("normalize", "output", Kind::Bool),
    key("output", "output", Kind::Text),
];

const SECTIONS: &[&str] = &["drive", "grid", "solver", "output"];

/// Inclusive evenly spaced axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    /// Axis values rounded to the 9 significant digits written to CSV, so the
    /// evaluated points are exactly the recorded ones.
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
            .into_iter()
            .map(crate::csv::quantize)
            .collect()
    }
}

/// Probe strength as given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    Dbm(f64),
    Mhz(f64),
}

impl Probe {
    pub fn angular(self) -> f64 {
        match self {
            Probe::Dbm(p) => dbm_to_rabi(p),
            Probe::Mhz(f) => mhz_to_angular(f),
        }
    }
}

/// Validated configuration in the units of the file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub backend: Backend,
    pub scheme: Scheme,
    pub tau_ns: f64,
    pub probe: Probe,
    /// `(gamma_10, gamma_21, gamma_11, gamma_22)` in MHz.
    pub rates_mhz: (f64, f64, f64, f64),
    /// `None`: half the total coherence decay.
    pub gamma_d_mhz: Option<f64>,
    pub delta: AxisSpec,
    pub control_kind: ControlKind,
    pub control: AxisSpec,
    /// `None`: `tau / 500`.
    pub dt_ns: Option<f64>,
    pub tol: f64,
    pub max_periods: usize,
    pub n_c: usize,
    pub q_max: usize,
    /// `None`: `round(1 / (Gamma tau))`.
    pub n_slits: Option<u32>,
    pub normalize: bool,
    pub output: Option<PathBuf>,
    /// Keys left at their default value, in declaration order.
    pub defaulted: Vec<&'static str>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: Backend::Lindblad,
            scheme: Scheme::Complementary,
            tau_ns: 50.0,
            probe: Probe::Dbm(-31.0),
            rates_mhz: MEASURED_RATES_MHZ,
            gamma_d_mhz: None,
            delta: AxisSpec {
                start: -60.0,
                stop: 60.0,
                count: 241,
            },
            control_kind: ControlKind::PowerDbm,
            control: AxisSpec {
                start: -20.0,
                stop: 0.0,
                count: 41,
            },
            dt_ns: None,
            tol: 1e-4,
            max_periods: 400,
            n_c: 40,
            q_max: GvvCutoffs::default().q_max,
            n_slits: None,
            normalize: true,
            output: None,
            defaulted: KEYS.iter().map(|k| k.name).collect(),
        }
    }
}

enum Value {
    Float(f64),
    Count(usize),
    Bool(bool),
    Text(String),
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut lines_of: Vec<(&'static str, usize)> = Vec::new();
    let mut section: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(line_no, line, "section header must end with ']'"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::new(line_no, name, "unknown section"));
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(line_no, line, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        let spec = KEYS
            .iter()
            .find(|s| s.name == k)
            .ok_or_else(|| ConfigError::new(line_no, k, "unknown key"))?;
        if let Some(sec) = &section {
            if sec != spec.section {
                return Err(ConfigError::new(
                    line_no,
                    k,
                    format!("belongs in [{}], found under [{sec}]", spec.section),
                ));
            }
        }
        if lines_of.iter().any(|(name, _)| *name == spec.name) {
            return Err(ConfigError::new(line_no, k, "key given more than once"));
        }
        if v.is_empty() {
            return Err(ConfigError::new(line_no, k, "missing value"));
        }
        let value = parse_value(spec.kind, v).map_err(|m| ConfigError::new(line_no, k, m))?;
        apply(&mut cfg, spec.name, value).map_err(|m| ConfigError::new(line_no, k, m))?;
        lines_of.push((spec.name, line_no));
    }

    let line_of = |name: &str| lines_of.iter().find(|(n, _)| *n == name).map_or(0, |(_, l)| *l);
    if lines_of.iter().any(|(n, _)| *n == "probe_dbm") && lines_of.iter().any(|(n, _)| *n == "probe_mhz") {
        return Err(ConfigError::new(line_of("probe_mhz"), "probe_mhz", "give either probe_dbm or probe_mhz"));
    }
    for (axis, start, stop) in [
        (&cfg.delta, "delta_start_mhz", "delta_stop_mhz"),
        (&cfg.control, "control_start", "control_stop"),
    ] {
        if axis.count > 1 && !(axis.start < axis.stop) {
            let line = line_of(start).max(line_of(stop));
            return Err(ConfigError::new(line, stop, "start must be below stop when count > 1"));
        }
    }
    cfg.defaulted = KEYS
        .iter()
        .map(|s| s.name)
        .filter(|n| !lines_of.iter().any(|(name, _)| name == n))
        .filter(|n| !(*n == "probe_dbm" && lines_of.iter().any(|(name, _)| *name == "probe_mhz")))
        .filter(|n| *n != "probe_mhz")
        .collect();
    Ok(cfg)
}

fn parse_value(kind: Kind, v: &str) -> Result<Value, String> {
    match kind {
        Kind::Float => v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Float)
            .ok_or_else(|| format!("expected a finite number, got `{v}`")),
        Kind::Count => v
            .parse::<usize>()
            .map(Value::Count)
            .map_err(|_| format!("expected a non-negative integer, got `{v}`")),
        Kind::Bool => match v {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected true or false, got `{v}`")),
        },
        Kind::Text => Ok(Value::Text(v.to_string())),
    }
}

fn apply(cfg: &mut RunConfig, name: &str, value: Value) -> Result<(), String> {
    let positive = |x: f64| if x > 0.0 { Ok(x) } else { Err("must be positive".to_string()) };
    let non_negative = |x: f64| if x >= 0.0 { Ok(x) } else { Err("must be non-negative".to_string()) };
    let at_least = |n: usize, min: usize| {
        if n >= min {
            Ok(n)
        } else {
            Err(format!("must be at least {min}"))
        }
    };
    match (name, value) {
        ("backend", Value::Text(s)) => cfg.backend = s.parse().map_err(|e: tdgrating_core::Error| e.to_string())?,
        ("scheme", Value::Text(s)) => cfg.scheme = s.parse().map_err(|e: tdgrating_core::Error| e.to_string())?,
        ("tau_ns", Value::Float(x)) => cfg.tau_ns = positive(x)?,
        ("probe_dbm", Value::Float(x)) => cfg.probe = Probe::Dbm(x),
        ("probe_mhz", Value::Float(x)) => cfg.probe = Probe::Mhz(non_negative(x)?),
        ("gamma_10_mhz", Value::Float(x)) => cfg.rates_mhz.0 = non_negative(x)?,
        ("gamma_21_mhz", Value::Float(x)) => cfg.rates_mhz.1 = non_negative(x)?,
        ("gamma_11_mhz", Value::Float(x)) => cfg.rates_mhz.2 = non_negative(x)?,
        ("gamma_22_mhz", Value::Float(x)) => cfg.rates_mhz.3 = non_negative(x)?,
        ("gamma_d_mhz", Value::Float(x)) => cfg.gamma_d_mhz = Some(non_negative(x)?),
        ("delta_start_mhz", Value::Float(x)) => cfg.delta.start = x,
        ("delta_stop_mhz", Value::Float(x)) => cfg.delta.stop = x,
        ("delta_count", Value::Count(n)) => cfg.delta.count = at_least(n, 1)?,
        ("control_kind", Value::Text(s)) => cfg.control_kind = s.parse().map_err(|e: tdgrating_core::Error| e.to_string())?,
        ("control_start", Value::Float(x)) => cfg.control.start = x,
        ("control_stop", Value::Float(x)) => cfg.control.stop = x,
        ("control_count", Value::Count(n)) => cfg.control.count = at_least(n, 1)?,
        ("dt_ns", Value::Float(x)) => cfg.dt_ns = Some(positive(x)?),
        ("tol", Value::Float(x)) => cfg.tol = positive(x)?,
        ("max_periods", Value::Count(n)) => cfg.max_periods = at_least(n, 2)?,
        ("n_c", Value::Count(n)) => cfg.n_c = at_least(n, 1)?,
        ("q_max", Value::Count(n)) => cfg.q_max = at_least(n, 2)?,
        ("n_slits", Value::Count(n)) => {
            let n = at_least(n, 1)?;
            cfg.n_slits = Some(u32::try_from(n).map_err(|_| "too large".to_string())?);
        }
        ("normalize", Value::Bool(b)) => cfg.normalize = b,
        ("output", Value::Text(s)) => cfg.output = Some(PathBuf::from(s)),
        _ => unreachable!("value kind follows the key table"),
    }
    Ok(())
}

impl RunConfig {
    pub fn params(&self) -> QutritParams {
        let (g10, g21, g11, g22) = self.rates_mhz;
        QutritParams {
            delta: 0.0,
            omega_p: self.probe.angular(),
            omega_c: 0.0,
            gamma_10: mhz_to_angular(g10),
            gamma_21: mhz_to_angular(g21),
            gamma_11: mhz_to_angular(g11),
            gamma_22: mhz_to_angular(g22),
        }
    }

    pub fn schedule(&self) -> Result<DriveSchedule, tdgrating_core::Error> {
        if self.scheme == Scheme::Unmodulated {
            Ok(DriveSchedule::unmodulated())
        } else {
            DriveSchedule::from_ns(self.scheme, self.tau_ns)
        }
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, tdgrating_core::Error> {
        let schedule = self.schedule()?;
        let solver = SolverOptions {
            steady: SteadyStateOptions {
                dt: self.dt_ns.map(ns_to_us),
                tol: self.tol,
                max_periods: self.max_periods,
            },
            n_c: self.n_c,
            cutoffs: GvvCutoffs {
                q_max: self.q_max,
                ..GvvCutoffs::default()
            },
            gamma_d: self.gamma_d_mhz.map(mhz_to_angular),
            n_slits: self.n_slits,
        };
        let config = SweepConfig {
            backend: self.backend,
            params: self.params(),
            schedule,
            delta_axis_mhz: self.delta.values(),
            control_kind: self.control_kind,
            control_axis: self.control.values(),
            solver,
            normalize: self.normalize,
        };
        config.validate()?;
        Ok(config)
    }

    /// Every effective setting as `config.<key>` entries, plus the list of
    /// keys that were defaulted.
    pub fn echo(&self) -> Vec<(String, String)> {
        let (g10, g21, g11, g22) = self.rates_mhz;
        let opt = |v: Option<String>, auto: &str| v.unwrap_or_else(|| auto.to_string());
        let mut out = vec![
            ("backend", self.backend.to_string()),
            ("scheme", self.scheme.to_string()),
            ("tau_ns", self.tau_ns.to_string()),
        ];
        match self.probe {
            Probe::Dbm(p) => out.push(("probe_dbm", p.to_string())),
            Probe::Mhz(f) => out.push(("probe_mhz", f.to_string())),
        }
        out.extend([
            ("gamma_10_mhz", g10.to_string()),
            ("gamma_21_mhz", g21.to_string()),
            ("gamma_11_mhz", g11.to_string()),
            ("gamma_22_mhz", g22.to_string()),
            ("gamma_d_mhz", opt(self.gamma_d_mhz.map(|g| g.to_string()), "auto")),
            ("delta_start_mhz", self.delta.start.to_string()),
            ("delta_stop_mhz", self.delta.stop.to_string()),
            ("delta_count", self.delta.count.to_string()),
            ("control_kind", self.control_kind.to_string()),
            ("control_start", self.control.start.to_string()),
            ("control_stop", self.control.stop.to_string()),
            ("control_count", self.control.count.to_string()),
            ("dt_ns", opt(self.dt_ns.map(|d| d.to_string()), &format!("tau/{STEPS_PER_PERIOD}"))),
            ("tol", self.tol.to_string()),
            ("max_periods", self.max_periods.to_string()),
            ("n_c", self.n_c.to_string()),
            ("q_max", self.q_max.to_string()),
            ("n_slits", opt(self.n_slits.map(|n| n.to_string()), "auto")),
            ("normalize", self.normalize.to_string()),
        ]);
        let mut echoed: Vec<(String, String)> = out.into_iter().map(|(k, v)| (format!("config.{k}"), v)).collect();
        echoed.push(("config.defaults_applied".to_string(), self.defaulted.join(",")));
        echoed
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.echo() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.backend, Backend::Lindblad);
        assert_eq!(cfg.tau_ns, 50.0);
        assert_eq!(cfg.probe, Probe::Dbm(-31.0));
        assert_eq!(cfg.rates_mhz, MEASURED_RATES_MHZ);
        assert!(cfg.defaulted.contains(&"tau_ns"));
        assert!(!cfg.defaulted.contains(&"probe_mhz"));
    }

    #[test]
    fn rate_in_megahertz_becomes_angular() {
        let cfg = parse_config("gamma_10_mhz = 2.267\n").unwrap();
        let g = cfg.params().gamma_10;
        assert!((g - 2.267 * std::f64::consts::TAU).abs() < 1e-12);
        assert!(!cfg.defaulted.contains(&"gamma_10_mhz"));
    }

    #[test]
    fn negative_period_cites_line() {
        let err = parse_config("# period\n\ntau_ns = -5\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.key, "tau_ns");
    }

    #[test]
    fn strictness() {
        assert_eq!(parse_config("tau = 50").unwrap_err().message, "unknown key");
        assert!(parse_config("[grid]\ntau_ns = 50").is_err());
        assert!(parse_config("[drive]\ntau_ns = 50\n[grid]\ndelta_count = 3").is_ok());
        assert!(parse_config("[physics]").is_err());
        assert!(parse_config("tau_ns = 50\ntau_ns = 60").is_err());
        assert!(parse_config("delta_count = 2.5").is_err());
        assert!(parse_config("normalize = yes").is_err());
        assert!(parse_config("probe_dbm = -31\nprobe_mhz = 2").is_err());
        let err = parse_config("delta_start_mhz = 5\ndelta_stop_mhz = -5").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn sections_and_comments() {
        let text = "[drive]\nbackend = gvv # effective model\nscheme = complementary\n[grid]\ncontrol_kind = rabi_mhz\ncontrol_count = 1\ncontrol_start = 40\ncontrol_stop = 40\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.backend, Backend::Gvv);
        assert_eq!(cfg.control_kind, ControlKind::RabiMhz);
        let sweep = cfg.sweep_config().unwrap();
        assert_eq!(sweep.control_axis, vec![40.0]);
        assert_eq!(sweep.delta_axis_mhz.len(), 241);
    }

    #[test]
    fn invalid_backend_pair_surfaces_at_conversion() {
        let cfg = parse_config("backend = analytic\nscheme = unmodulated").unwrap();
        assert!(cfg.sweep_config().is_err());
    }
}
