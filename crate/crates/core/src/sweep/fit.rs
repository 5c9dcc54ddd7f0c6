use alloc::vec::Vec;

use crate::{Error, Result};

/// Residual RMS, relative to the fitted amplitude, above which a fit is
/// flagged as a poor single-peak description.
pub const FLAG_RELATIVE_RMS: f64 = 0.01;

const MAX_ITERATIONS: usize = 500;

/// Least-squares Lorentzian `amplitude / (1 + ((x - center) / (fwhm/2))^2) +
/// offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFit {
    pub center: f64,
    /// Full width at half maximum, positive.
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    /// `residual_rms > FLAG_RELATIVE_RMS * |amplitude|`.
    pub flagged: bool,
}

pub fn lorentzian(x: f64, center: f64, fwhm: f64, amplitude: f64, offset: f64) -> f64 {
    let u = (x - center) / (0.5 * fwhm);
    amplitude / (1.0 + u * u) + offset
}

/// Levenberg-Marquardt fit to the samples with `lo <= x <= hi`.
pub fn fit_lorentzian(axis: &[f64], row: &[f64], window: (f64, f64)) -> Result<PeakFit> {
    if axis.len() != row.len() {
        return Err(Error::invalid("row", "axis and row lengths differ"));
    }
    let (lo, hi) = window;
    let (xs, ys): (Vec<f64>, Vec<f64>) = axis
        .iter()
        .zip(row)
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(x, y)| (*x, *y))
        .unzip();
    if xs.len() < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: xs.len() });
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("row", "values must be finite"));
    }

    let mut p = initial_guess(&xs, &ys);
    let mut sse = sum_squares(&xs, &ys, &p);
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(&xs, &ys, &p);
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for i in 0..4 {
                a[i][i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve4(a, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], libm::fabs(p[2] + step[2]), p[3] + step[3]];
            let trial_sse = sum_squares(&xs, &ys, &trial);
            if trial_sse <= sse {
                small_step = (0..4).all(|i| libm::fabs(step[i]) <= 1e-12 * (libm::fabs(p[i]) + 1e-12));
                let gain = sse - trial_sse;
                p = trial;
                sse = trial_sse;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if gain <= 1e-15 * sse || sse <= 1e-28 * scale {
                    small_step = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        let result = finish(&p, sse, xs.len(), iteration);
        if !accepted || small_step {
            // No downhill step exists at any damping: a stationary point.
            return Ok(result);
        }
        if iteration == MAX_ITERATIONS {
            return Err(Error::FitNoConvergence {
                iterations: iteration,
                best: result,
            });
        }
    }
    unreachable!("loop returns")
}

fn finish(p: &[f64; 4], sse: f64, n: usize, iterations: usize) -> PeakFit {
    let residual_rms = libm::sqrt(sse / n as f64);
    PeakFit {
        center: p[1],
        fwhm: 2.0 * libm::fabs(p[2]),
        amplitude: p[0],
        offset: p[3],
        residual_rms,
        iterations,
        flagged: residual_rms > FLAG_RELATIVE_RMS * libm::fabs(p[0]),
    }
}

/// `[amplitude, center, half width, offset]`.
fn initial_guess(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let (imax, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let half = 0.5 * (ymax + ymin);
    let mut left = xs[0];
    for k in (0..imax).rev() {
        if ys[k] < half {
            left = xs[k];
            break;
        }
    }
    let mut right = xs[xs.len() - 1];
    for k in imax + 1..xs.len() {
        if ys[k] < half {
            right = xs[k];
            break;
        }
    }
    let mut width = 0.5 * (right - left);
    if !(width > 0.0) {
        width = 0.25 * (xs[xs.len() - 1] - xs[0]);
    }
    [ymax - ymin, xs[imax], width, ymin]
}

fn model_and_gradient(x: f64, p: &[f64; 4]) -> (f64, [f64; 4]) {
    let [a, c, w, _] = *p;
    let u = (x - c) / w;
    let d = 1.0 / (1.0 + u * u);
    let value = a * d + p[3];
    let dd_du = -2.0 * u * d * d;
    (value, [d, a * dd_du * (-1.0 / w), a * dd_du * (-u / w), 1.0])
}

fn sum_squares(xs: &[f64], ys: &[f64], p: &[f64; 4]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - model_and_gradient(*x, p).0;
            r * r
        })
        .sum()
}

fn normal_equations(xs: &[f64], ys: &[f64], p: &[f64; 4]) -> ([[f64; 4]; 4], [f64; 4]) {
    let mut jtj = [[0.0; 4]; 4];
    let mut jtr = [0.0; 4];
    for (x, y) in xs.iter().zip(ys) {
        let (f, g) = model_and_gradient(*x, p);
        let r = y - f;
        for i in 0..4 {
            jtr[i] += g[i] * r;
            for j in 0..4 {
                jtj[i][j] += g[i] * g[j];
            }
        }
    }
    (jtj, jtr)
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))?;
        if !(libm::fabs(a[pivot][col]) > 1e-300) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in row + 1..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}
