//! Grid CSV: a `# key = value` metadata block, then `delta_mhz,control,signal`
//! rows in row-major order with 9 significant digits.
//!
//! Grids whose axes and values are already [`quantize`]d survive
//! [`emit_csv`] then [`parse_csv`] bit for bit.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use tdgrating_core::sweep::{ControlKind, SpectrumGrid};

pub const HEADER: &str = "delta_mhz,control,signal";
const KIND_KEY: &str = "control_kind";

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("grid: {0}")]
    Grid(#[from] tdgrating_core::Error),
}

fn format_error(line: usize, message: impl Into<String>) -> CsvError {
    CsvError::Format {
        line,
        message: message.into(),
    }
}

/// Rounds to the 9 significant digits the CSV carries.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn number(x: f64) -> String {
    format!("{x:.8e}")
}

fn valid_meta(key: &str, value: &str) -> bool {
    !key.is_empty()
        && !key.contains('=')
        && key.trim() == key
        && value.trim() == value
        && !key.contains(['\n', '\r'])
        && !value.contains(['\n', '\r'])
}

/// Serializes `grid`; `extra` meta entries follow the grid's own.
pub fn emit_csv(grid: &SpectrumGrid, extra: &[(String, String)]) -> Result<String, CsvError> {
    grid.validate()?;
    let mut out = String::with_capacity(64 * (grid.values.len() + grid.meta.len() + 2));
    out.push_str(&format!("# {KIND_KEY} = {}\n", grid.control_kind));
    for (k, v) in grid.meta.iter().chain(extra) {
        if !valid_meta(k, v) || k == KIND_KEY {
            return Err(format_error(0, format!("unrepresentable metadata entry `{k}`")));
        }
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(HEADER);
    out.push('\n');
    for (r, control) in grid.control_axis.iter().enumerate() {
        for (c, delta) in grid.delta_axis.iter().enumerate() {
            let value = grid.get(r, c).map_or_else(|| "nan".to_string(), number);
            out.push_str(&format!("{},{},{value}\n", number(*delta), number(*control)));
        }
    }
    Ok(out)
}

pub fn write_csv(grid: &SpectrumGrid, extra: &[(String, String)], path: &Path) -> Result<(), CsvError> {
    let text = emit_csv(grid, extra)?;
    fs::write(path, text).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_csv(text: &str) -> Result<SpectrumGrid, CsvError> {
    let mut kind: Option<ControlKind> = None;
    let mut meta = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header_seen = false;
    for (no, line) in lines.by_ref() {
        if let Some(entry) = line.strip_prefix("# ") {
            let (k, v) = entry
                .split_once(" = ")
                .ok_or_else(|| format_error(no, "metadata must read `# key = value`"))?;
            if !valid_meta(k, v) {
                return Err(format_error(no, format!("malformed metadata key `{k}`")));
            }
            if k == KIND_KEY {
                if kind.is_some() {
                    return Err(format_error(no, "control_kind given twice"));
                }
                kind = Some(v.parse().map_err(|e: tdgrating_core::Error| format_error(no, e.to_string()))?);
            } else {
                if meta.iter().any(|(key, _): &(String, String)| key == k) {
                    return Err(format_error(no, format!("duplicate metadata key `{k}`")));
                }
                meta.push((k.to_string(), v.to_string()));
            }
        } else if line == HEADER {
            header_seen = true;
            break;
        } else {
            return Err(format_error(no, format!("expected metadata or `{HEADER}`")));
        }
    }
    if !header_seen {
        return Err(format_error(0, format!("missing `{HEADER}` header")));
    }
    let kind = kind.ok_or_else(|| format_error(0, "missing control_kind metadata"))?;

    let mut rows: Vec<(usize, f64, f64, Option<f64>)> = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format_error(no, "expected three comma-separated fields"));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| format_error(no, format!("bad number `{s}`")));
        let delta = parse(fields[0])?;
        let control = parse(fields[1])?;
        let value = match fields[2] {
            "nan" => None,
            s => {
                let v = parse(s)?;
                if !v.is_finite() {
                    return Err(format_error(no, "signal must be finite or nan"));
                }
                Some(v)
            }
        };
        rows.push((no, delta, control, value));
    }
    let first = rows.first().ok_or_else(|| format_error(0, "no data rows"))?;
    let first_control = first.2;
    let cols = rows.iter().take_while(|r| r.2.to_bits() == first_control.to_bits()).count();
    if rows.len() % cols != 0 {
        return Err(format_error(rows.last().map_or(0, |r| r.0), "row count is not a whole number of scans"));
    }
    let delta_axis: Vec<f64> = rows[..cols].iter().map(|r| r.1).collect();
    let mut control_axis = Vec::with_capacity(rows.len() / cols);
    let mut values = Vec::with_capacity(rows.len());
    for (i, (no, delta, control, value)) in rows.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        if c == 0 {
            control_axis.push(*control);
        }
        if delta.to_bits() != delta_axis[c].to_bits() || control.to_bits() != control_axis[r].to_bits() {
            return Err(format_error(*no, "rows are not a row-major grid"));
        }
        values.push(*value);
    }
    Ok(SpectrumGrid::new(delta_axis, kind, control_axis, values, meta)?)
}

pub fn read_csv(path: &Path) -> Result<SpectrumGrid, CsvError> {
    let text = fs::read_to_string(path).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}
