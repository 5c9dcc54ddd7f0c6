use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined position on the axis.
    pub center: f64,
    /// Refined height.
    pub height: f64,
    /// Height above the higher of the two surrounding minima.
    pub prominence: f64,
    /// Sample index of the raw maximum.
    pub index: usize,
}

/// Interior local maxima whose prominence reaches `min_prominence`, refined by
/// a parabola through the maximum and its two neighbours. Plateaus count once,
/// at their middle sample.
pub fn find_peaks(axis: &[f64], row: &[f64], min_prominence: f64) -> Result<Vec<Peak>> {
    check_row(axis, row)?;
    let n = row.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if row[i] > row[i - 1] {
            let mut j = i;
            while j + 1 < n && row[j + 1] == row[i] {
                j += 1;
            }
            if j + 1 < n && row[j + 1] < row[i] {
                let p = (i + j) / 2;
                let prominence = prominence(row, p);
                if prominence >= min_prominence {
                    let (center, height) = refine(axis, row, p, i == j);
                    peaks.push(Peak {
                        center,
                        height,
                        prominence,
                        index: p,
                    });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(peaks)
}

/// Axis position of the maximum of the row after a boxcar average over
/// `width` (all samples within `width / 2`).
pub fn smoothed_argmax(axis: &[f64], row: &[f64], width: f64) -> Result<f64> {
    check_row(axis, row)?;
    let half = 0.5 * width;
    let mut best = (f64::NEG_INFINITY, axis[0]);
    for &x in axis {
        let (mut sum, mut count) = (0.0, 0usize);
        for (k, &y) in axis.iter().enumerate() {
            if libm::fabs(y - x) <= half {
                sum += row[k];
                count += 1;
            }
        }
        let mean = sum / count as f64;
        if mean > best.0 {
            best = (mean, x);
        }
    }
    Ok(best.1)
}

fn check_row(axis: &[f64], row: &[f64]) -> Result<()> {
    if axis.len() != row.len() {
        return Err(Error::invalid("row", "axis and row lengths differ"));
    }
    if row.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: row.len(),
        });
    }
    if row.iter().chain(axis).any(|v| !v.is_finite()) {
        return Err(Error::invalid("row", "values must be finite"));
    }
    Ok(())
}

fn prominence(row: &[f64], p: usize) -> f64 {
    let h = row[p];
    let mut left_min = h;
    for k in (0..p).rev() {
        if row[k] > h {
            break;
        }
        left_min = left_min.min(row[k]);
    }
    let mut right_min = h;
    for &v in &row[p + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn refine(axis: &[f64], row: &[f64], p: usize, single: bool) -> (f64, f64) {
    if !single {
        return (axis[p], row[p]);
    }
    let (ym, y0, yp) = (row[p - 1], row[p], row[p + 1]);
    let curvature = ym - 2.0 * y0 + yp;
    if curvature >= 0.0 {
        return (axis[p], y0);
    }
    let offset = (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5);
    let step = if offset >= 0.0 { axis[p + 1] - axis[p] } else { axis[p] - axis[p - 1] };
    (axis[p] + offset * step, y0 - 0.25 * (ym - yp) * offset)
}
