use alloc::vec::Vec;

use super::peaks::{find_peaks, Peak};
use super::SpectrumGrid;
use crate::{Error, Result};

/// Peaks found with `strict` prominence in one grid are matched against
/// peaks found with `lenient` prominence in the other, in both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMatching {
    pub strict: f64,
    pub lenient: f64,
}

impl Default for PeakMatching {
    fn default() -> Self {
        PeakMatching {
            strict: 0.05,
            lenient: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowComparison {
    pub control: f64,
    /// Distances (detuning units) from each strict peak to the nearest
    /// lenient peak of the other grid.
    pub offsets: Vec<f64>,
    /// Strict peaks with no counterpart at all.
    pub unmatched: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Points present in both grids.
    pub compared_points: usize,
    pub rows: Vec<RowComparison>,
}

impl CompareReport {
    pub fn max_peak_offset(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.offsets.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn unmatched_peaks(&self) -> usize {
        self.rows.iter().map(|r| r.unmatched).sum()
    }
}

/// Differences between two grids on identical axes. Both are normalized to
/// their own maximum first; points missing in either grid are skipped.
pub fn compare(a: &SpectrumGrid, b: &SpectrumGrid, matching: &PeakMatching) -> Result<CompareReport> {
    if a.control_kind != b.control_kind || !same_axis(&a.delta_axis, &b.delta_axis) || !same_axis(&a.control_axis, &b.control_axis) {
        return Err(Error::AxisMismatch);
    }
    let mut a = a.clone();
    let mut b = b.clone();
    a.normalize();
    b.normalize();

    let (mut max_abs, mut sum, mut count) = (0.0_f64, 0.0, 0usize);
    for (x, y) in a.values.iter().zip(&b.values) {
        if let (Some(x), Some(y)) = (x, y) {
            let d = libm::fabs(x - y);
            max_abs = max_abs.max(d);
            sum += d;
            count += 1;
        }
    }
    let mut rows = Vec::with_capacity(a.rows());
    for r in 0..a.rows() {
        let (Some(ra), Some(rb)) = (a.row_complete(r), b.row_complete(r)) else {
            continue;
        };
        if ra.len() < 5 {
            continue;
        }
        let axis = &a.delta_axis;
        let mut offsets = Vec::new();
        let mut unmatched = 0;
        for (strict_row, lenient_row) in [(&ra, &rb), (&rb, &ra)] {
            let strict = find_peaks(axis, strict_row, matching.strict)?;
            let lenient = find_peaks(axis, lenient_row, matching.lenient)?;
            for peak in &strict {
                match nearest(&lenient, peak.center) {
                    Some(d) => offsets.push(d),
                    None => unmatched += 1,
                }
            }
        }
        rows.push(RowComparison {
            control: a.control_axis[r],
            offsets,
            unmatched,
        });
    }
    Ok(CompareReport {
        max_abs,
        mean_abs: if count > 0 { sum / count as f64 } else { 0.0 },
        compared_points: count,
        rows,
    })
}

fn nearest(peaks: &[Peak], center: f64) -> Option<f64> {
    peaks.iter().map(|p| libm::fabs(p.center - center)).reduce(f64::min)
}

fn same_axis(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| libm::fabs(x - y) <= 1e-9 * libm::fabs(*x).max(libm::fabs(*y)).max(1.0))
}
