//! `tdgrating` subcommands.
//!
//! Exit codes: 0 success, 1 usage, configuration or input error, 2 numerical
//! failure (solver breakdown, failed or unconverged points, fit failure).

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use tdgrating_core::params::Scheme;
use tdgrating_core::sweep::{compare, find_peaks, fit_lorentzian, Backend, PeakMatching, SpectrumGrid};
use tdgrating_core::units::{angular_to_mhz, dbm_to_rabi, mhz_to_angular, rabi_to_dbm};

use crate::config::{parse_config, ConfigError, RunConfig};
use crate::csv::{emit_csv, read_csv, CsvError};
use crate::runner::{run_sweep, timestamp, worker_count, RunError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "tdgrating", version, about = "Time-domain grating spectra of a driven qutrit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a backend over the full (detuning, control) grid.
    Sweep(SweepArgs),
    /// Evaluate a single control value over the detuning axis.
    Spectrum {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Control value, in the configured control_kind units.
        #[arg(long, allow_negative_numbers = true)]
        control: f64,
    },
    /// Residuals and peak offsets between two grids on identical axes.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Prominence for peaks that must be matched.
        #[arg(long, default_value_t = PeakMatching::default().strict)]
        strict: f64,
        /// Prominence for peaks that count as a match.
        #[arg(long, default_value_t = PeakMatching::default().lenient)]
        lenient: f64,
    },
    /// Peak centers of one grid row, optionally with Lorentzian fits.
    Peaks {
        #[arg(long = "in")]
        input: PathBuf,
        /// Row index (control axis position).
        #[arg(long)]
        row: usize,
        #[arg(long, default_value_t = 0.05)]
        prominence: f64,
        /// Fit each peak over center +- this half-width in MHz.
        #[arg(long)]
        fit_window: Option<f64>,
    },
    /// Convert between microwave power and Rabi frequency.
    #[command(group = clap::ArgGroup::new("quantity").required(true).args(["dbm", "mhz"]))]
    Convert {
        #[arg(long, allow_negative_numbers = true)]
        dbm: Option<f64>,
        #[arg(long)]
        mhz: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Overrides the configured backend.
    #[arg(long)]
    backend: Option<Backend>,
    /// Overrides the configured scheme.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when neither this nor `output` is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to TDGRATING_WORKERS or available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn usage(e: impl Display) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<tdgrating_core::Error> for Failure {
    fn from(e: tdgrating_core::Error) -> Self {
        use tdgrating_core::Error as E;
        match e {
            E::EigenNoConvergence { .. } | E::BesselOutOfRange { .. } | E::FitNoConvergence { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::usage(format!("config: {e}"))
    }
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Grid(core) => core.into(),
            other => Failure::usage(other),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Core(core) => core.into(),
            other => Failure::usage(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e)
    }
}

/// Runs the command line `args` (program name first).
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\n{}", Cli::command().render_usage());
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    match command {
        Command::Sweep(args) => sweep(args, None, out, err),
        Command::Spectrum { sweep: args, control } => sweep(args, Some(control), out, err),
        Command::Compare { a, b, strict, lenient } => {
            let (ga, gb) = (read_csv(&a)?, read_csv(&b)?);
            let report = compare(&ga, &gb, &PeakMatching { strict, lenient })?;
            writeln!(out, "compared_points = {}", report.compared_points)?;
            writeln!(out, "max_abs_deviation = {:e}", report.max_abs)?;
            writeln!(out, "mean_abs_deviation = {:e}", report.mean_abs)?;
            writeln!(out, "max_peak_offset_mhz = {:e}", report.max_peak_offset())?;
            writeln!(out, "unmatched_peaks = {}", report.unmatched_peaks())?;
            for row in &report.rows {
                let offsets: Vec<String> = row.offsets.iter().map(|o| format!("{o:.4}")).collect();
                writeln!(
                    out,
                    "row control={} offsets_mhz=[{}] unmatched={}",
                    row.control,
                    offsets.join(","),
                    row.unmatched
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Peaks {
            input,
            row,
            prominence,
            fit_window,
        } => peaks(&input, row, prominence, fit_window, out),
        Command::Convert { dbm, mhz } => {
            match (dbm, mhz) {
                (Some(p), None) => {
                    if !p.is_finite() {
                        return Err(Failure::usage("power must be finite"));
                    }
                    writeln!(out, "{p} dBm = {:.9} MHz", angular_to_mhz(dbm_to_rabi(p)))?;
                }
                (None, Some(f)) => {
                    let p = rabi_to_dbm(mhz_to_angular(f))?;
                    writeln!(out, "{f} MHz = {p:.9} dBm")?;
                }
                _ => unreachable!("clap enforces exactly one quantity"),
            }
            Ok(EXIT_OK)
        }
    }
}

fn load_config(args: &SweepArgs, control: Option<f64>) -> Result<RunConfig, Failure> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    let mut overridden: Vec<&str> = Vec::new();
    if let Some(b) = args.backend {
        cfg.backend = b;
        overridden.push("backend");
    }
    if let Some(s) = args.scheme {
        cfg.scheme = s;
        overridden.push("scheme");
    }
    if let Some(c) = control {
        if !c.is_finite() {
            return Err(Failure::usage("--control must be finite"));
        }
        cfg.control.start = c;
        cfg.control.stop = c;
        cfg.control.count = 1;
        overridden.extend(["control_start", "control_stop", "control_count"]);
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
        overridden.push("output");
    }
    cfg.defaulted.retain(|k| !overridden.contains(k));
    Ok(cfg)
}

fn sweep(args: SweepArgs, control: Option<f64>, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    let cfg = load_config(&args, control)?;
    let config = cfg.sweep_config()?;
    let workers = worker_count(args.workers)?;
    let outcome = run_sweep(&config, workers)?;

    let mut extra = cfg.echo();
    extra.push(("config.workers".to_string(), workers.to_string()));
    extra.push(("generated_unix_s".to_string(), timestamp()));
    let text = emit_csv(&outcome.grid, &extra)?;
    match &cfg.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            writeln!(
                err,
                "wrote {} points to {}",
                outcome.grid.values.len(),
                path.display()
            )?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    for f in &outcome.failures {
        writeln!(err, "point (row {}, col {}) failed: {}", f.row, f.col, f.error)?;
    }
    if !outcome.unconverged.is_empty() {
        writeln!(err, "{} points did not converge", outcome.unconverged.len())?;
    }
    Ok(if outcome.is_clean() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn peaks(path: &Path, row: usize, prominence: f64, fit_window: Option<f64>, out: &mut dyn Write) -> Result<u8, Failure> {
    let grid: SpectrumGrid = read_csv(path)?;
    if row >= grid.rows() {
        return Err(Failure::usage(format!("row {row} out of range (grid has {} rows)", grid.rows())));
    }
    let values = grid
        .row_complete(row)
        .ok_or_else(|| Failure::usage(format!("row {row} has missing values")))?;
    let found = find_peaks(&grid.delta_axis, &values, prominence)?;
    writeln!(out, "row = {row}")?;
    writeln!(out, "control = {}", grid.control_axis[row])?;
    writeln!(out, "peaks = {}", found.len())?;
    let mut code = EXIT_OK;
    for p in &found {
        write!(
            out,
            "peak center_mhz={:.6} height={:.6} prominence={:.6}",
            p.center, p.height, p.prominence
        )?;
        if let Some(w) = fit_window {
            if !(w > 0.0) {
                return Err(Failure::usage("--fit-window must be positive"));
            }
            match fit_lorentzian(&grid.delta_axis, &values, (p.center - w, p.center + w)) {
                Ok(fit) => write!(
                    out,
                    " fit_center_mhz={:.6} fwhm_mhz={:.6} amplitude={:.6} offset={:.6} rms={:.3e}{}",
                    fit.center,
                    fit.fwhm,
                    fit.amplitude,
                    fit.offset,
                    fit.residual_rms,
                    if fit.flagged { " flagged" } else { "" }
                )?,
                Err(e) => {
                    write!(out, " fit_failed=\"{e}\"")?;
                    code = EXIT_NUMERICAL;
                }
            }
        }
        writeln!(out)?;
    }
    Ok(code)
}
