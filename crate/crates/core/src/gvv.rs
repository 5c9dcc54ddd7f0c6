//! Effective-Hamiltonian (generalized Van Vleck) model of the complementary
//! drive: two ladders of Lorentzians under a common envelope.
//!
//! The couplings are nested sums over products of Bessel functions. The
//! product over all shells is the Fourier series of one periodic phase factor,
//! so the nested sum is evaluated as a sequence of convolutions: shell `q`
//! convolves the running coefficient series with `J_k(z_q)` placed at
//! harmonic `k (2q - 1)`, where `z_q = (-1)^(q-1) B / (2q-1)^2` and
//! `B = -omega_c / (omega pi)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::ops::RangeInclusive;

use crate::bessel::{bessel_j_orders, MAX_ORDER};
use crate::params::{DriveSchedule, QutritParams, Scheme};
use crate::{Error, Result};

/// Last-shell contribution, relative to the coupling scale
/// `omega_p / (4 sqrt 2)`, above which the cutoffs count as insufficient.
pub const SUFFICIENCY_TOL: f64 = 1e-6;

/// Largest innermost shell argument the cutoffs may leave untreated.
pub const MAX_TAIL_ARGUMENT: f64 = 0.05;

/// Bessel magnitudes below this are skipped in the convolutions.
const NEGLIGIBLE: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GvvCutoffs {
    /// Number of nested shells.
    pub q_max: usize,
    /// Bessel orders per shell span `|k| <= ceil(|z_q|) + index_pad`.
    pub index_pad: usize,
    /// Harmonics `|K| <= harmonic_limit` are kept.
    pub harmonic_limit: usize,
}

impl Default for GvvCutoffs {
    fn default() -> Self {
        GvvCutoffs {
            q_max: 256,
            index_pad: 6,
            harmonic_limit: 4096,
        }
    }
}

impl GvvCutoffs {
    fn check(&self, b: f64) -> Result<()> {
        if self.q_max < 2 || self.harmonic_limit < 1 {
            return Err(Error::invalid("q_max", "need at least two shells and one harmonic"));
        }
        let last = (2 * self.q_max - 1) as f64;
        if !(libm::fabs(b) / (last * last) < MAX_TAIL_ARGUMENT) {
            return Err(Error::invalid("q_max", "innermost shell argument must stay below 0.05"));
        }
        Ok(())
    }
}

/// `B = -omega_c / (omega pi)`.
pub fn bessel_argument(omega_c: f64, omega: f64) -> f64 {
    -omega_c / (omega * PI)
}

/// Fourier coefficients `c_K` of the product of all shell factors.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSeries {
    limit: usize,
    coeffs: Vec<f64>,
    /// The same series without the last shell.
    without_last: Vec<f64>,
}

impl HarmonicSeries {
    pub fn new(b: f64, cutoffs: &GvvCutoffs) -> Result<Self> {
        cutoffs.check(b)?;
        let limit = cutoffs.harmonic_limit;
        let width = 2 * limit + 1;
        let mut coeffs = vec![0.0; width];
        coeffs[limit] = 1.0;
        let mut scratch = vec![0.0; width];
        let mut without_last = Vec::new();
        for q in 1..=cutoffs.q_max {
            if q == cutoffs.q_max {
                without_last = coeffs.clone();
            }
            let stride = 2 * q - 1;
            let sign = if q % 2 == 1 { 1.0 } else { -1.0 };
            let z = sign * b / (stride * stride) as f64;
            let span = (libm::ceil(libm::fabs(z)) as usize + cutoffs.index_pad).min(MAX_ORDER as usize);
            let bessel = bessel_j_orders(z, span)?;
            scratch.iter_mut().for_each(|v| *v = 0.0);
            for (k, &jk) in bessel.iter().enumerate() {
                if libm::fabs(jk) < NEGLIGIBLE {
                    continue;
                }
                let shift = k * stride;
                if shift > 2 * limit {
                    break;
                }
                // J_{-k} = (-1)^k J_k
                let jneg = if k % 2 == 1 { -jk } else { jk };
                for target in shift..width {
                    scratch[target] += jk * coeffs[target - shift];
                }
                if k > 0 {
                    for target in 0..width - shift {
                        scratch[target] += jneg * coeffs[target + shift];
                    }
                }
            }
            core::mem::swap(&mut coeffs, &mut scratch);
        }
        Ok(HarmonicSeries {
            limit,
            coeffs,
            without_last,
        })
    }

    /// `c_K`, zero outside the kept harmonics.
    pub fn coeff(&self, k: i64) -> f64 {
        lookup(&self.coeffs, self.limit, k)
    }

    /// Probe-side coupling bracket for index `n`, per unit probe strength:
    /// `-c_n / (4 sqrt 2) + sum_j A_j (c_{n+2j-1} + c_{n-2j+1})`,
    /// `A_j = (-1)^j / (2 sqrt 2 (2j-1) pi)`.
    fn bracket(coeffs: &[f64], limit: usize, n: i64) -> f64 {
        let mut acc = -lookup(coeffs, limit, n) / (4.0 * SQRT_2);
        let reach = limit as i64 + n.abs();
        let mut j = 1i64;
        while 2 * j - 1 <= reach {
            let odd = 2 * j - 1;
            let a = if j % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * SQRT_2 * odd as f64 * PI);
            acc += a * (lookup(coeffs, limit, n + odd) + lookup(coeffs, limit, n - odd));
            j += 1;
        }
        acc
    }
}

fn lookup(coeffs: &[f64], limit: usize, k: i64) -> f64 {
    let idx = k + limit as i64;
    if idx < 0 || idx as usize >= coeffs.len() {
        0.0
    } else {
        coeffs[idx as usize]
    }
}

/// Couplings of the ground state to the two dressed ladders.
#[derive(Debug, Clone, PartialEq)]
pub struct GvvCouplings {
    pub omega_p: f64,
    pub cutoffs: GvvCutoffs,
    lower: HarmonicSeries,
    upper: HarmonicSeries,
}

/// One evaluated coupling pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GvvCoupling {
    pub n: i64,
    /// Coupling to the lower dressed ladder, index `n`.
    pub p: f64,
    /// Coupling to the upper dressed ladder, index `n`.
    pub q: f64,
    /// Change caused by the last shell, relative to `omega_p / (4 sqrt 2)`.
    pub last_shell: f64,
    /// `last_shell <= SUFFICIENCY_TOL`.
    pub sufficient: bool,
}

impl GvvCouplings {
    pub fn new(params: &QutritParams, schedule: &DriveSchedule, cutoffs: &GvvCutoffs) -> Result<Self> {
        require_complementary(schedule, "gvv_coupling")?;
        params.validate()?;
        let b = bessel_argument(params.omega_c, schedule.omega());
        Ok(GvvCouplings {
            omega_p: params.omega_p,
            cutoffs: *cutoffs,
            lower: HarmonicSeries::new(b, cutoffs)?,
            upper: HarmonicSeries::new(-b, cutoffs)?,
        })
    }

    pub fn p(&self, n: i64) -> f64 {
        self.omega_p * HarmonicSeries::bracket(&self.lower.coeffs, self.lower.limit, n)
    }

    /// The upper ladder uses `-B` and the opposite overall sign.
    pub fn q(&self, n: i64) -> f64 {
        -self.omega_p * HarmonicSeries::bracket(&self.upper.coeffs, self.upper.limit, n)
    }

    pub fn evaluate(&self, n: i64) -> GvvCoupling {
        let p = self.p(n);
        let q = self.q(n);
        let scale = self.omega_p / (4.0 * SQRT_2);
        let last_shell = if scale > 0.0 {
            let lp = self.omega_p * HarmonicSeries::bracket(&self.lower.without_last, self.lower.limit, n);
            let lq = -self.omega_p * HarmonicSeries::bracket(&self.upper.without_last, self.upper.limit, n);
            libm::fabs(p - lp).max(libm::fabs(q - lq)) / scale
        } else {
            0.0
        };
        GvvCoupling {
            n,
            p,
            q,
            last_shell,
            sufficient: last_shell <= SUFFICIENCY_TOL,
        }
    }
}

pub fn gvv_coupling(n: i64, params: &QutritParams, schedule: &DriveSchedule, cutoffs: &GvvCutoffs) -> Result<GvvCoupling> {
    Ok(GvvCouplings::new(params, schedule, cutoffs)?.evaluate(n))
}

/// Control strength whose index-0 coupling equals the index-`n` coupling at
/// `omega_c`: `omega_c + 4 n omega`.
pub fn shifted_control(n: i64, omega_c: f64, omega: f64) -> f64 {
    omega_c + 4.0 * n as f64 * omega
}

/// Envelope `Omega^2` at probe detuning `delta`: the squared index-0 coupling
/// at the control strength that puts that index on resonance at `delta`.
pub fn envelope_omega_sq(delta: f64, params: &QutritParams, schedule: &DriveSchedule, cutoffs: &GvvCutoffs) -> Result<f64> {
    require_complementary(schedule, "envelope_omega_sq")?;
    params.validate()?;
    let value = lower_coupling(0, params.omega_p, 4.0 * libm::fabs(delta), schedule.omega(), cutoffs)?;
    Ok(value * value)
}

/// Lower-ladder coupling of index `n` for a control strength of either sign.
pub fn lower_coupling(n: i64, omega_p: f64, omega_c: f64, omega: f64, cutoffs: &GvvCutoffs) -> Result<f64> {
    let series = HarmonicSeries::new(bessel_argument(omega_c, omega), cutoffs)?;
    Ok(omega_p * HarmonicSeries::bracket(&series.coeffs, series.limit, n))
}

/// Resonance positions `-n omega - omega_c/4` (lower ladder) and
/// `-m omega + omega_c/4` (upper ladder).
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceGrid {
    pub indices: RangeInclusive<i64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub linewidth: f64,
}

impl ResonanceGrid {
    pub fn new(omega_c: f64, omega: f64, indices: RangeInclusive<i64>, linewidth: f64) -> Self {
        let lower = indices.clone().map(|n| -(n as f64) * omega - 0.25 * omega_c).collect();
        let upper = indices.clone().map(|m| -(m as f64) * omega + 0.25 * omega_c).collect();
        ResonanceGrid {
            indices,
            lower,
            upper,
            linewidth,
        }
    }

    /// Union of both ladders inside `[lo, hi]`, ascending.
    pub fn positions_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .lower
            .iter()
            .chain(self.upper.iter())
            .copied()
            .filter(|x| *x >= lo && *x <= hi)
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

/// `sum_n 1 / ((x - n omega)^2 + gamma^2)` over all integers `n`.
pub fn ladder_sum(x: f64, gamma: f64, omega: f64) -> f64 {
    let a = 2.0 * PI * gamma / omega;
    let e1 = libm::exp(-a);
    let e2 = e1 * e1;
    let c = libm::cos(2.0 * PI * x / omega);
    PI / (gamma * omega) * (1.0 - e2) / (1.0 + e2 - 2.0 * e1 * c)
}

/// Environmental damping default: half the total coherence decay, i.e. the
/// decay of the ground/doublet coherence.
pub fn default_environment_damping(params: &QutritParams) -> f64 {
    0.5 * params.total_gamma()
}

/// Lorentzian-ladder spectrum over a fixed detuning axis. The envelope depends
/// on detuning only, so one table serves every control strength.
#[derive(Debug, Clone, PartialEq)]
pub struct GvvSpectrum {
    pub deltas: Vec<f64>,
    pub omega_sq: Vec<f64>,
    pub omega: f64,
    pub gamma_d: f64,
}

impl GvvSpectrum {
    pub fn new(deltas: &[f64], params: &QutritParams, schedule: &DriveSchedule, gamma_d: f64, cutoffs: &GvvCutoffs) -> Result<Self> {
        let omega_sq = deltas
            .iter()
            .map(|&d| envelope_omega_sq(d, params, schedule, cutoffs))
            .collect::<Result<Vec<_>>>()?;
        Self::from_envelope(deltas.to_vec(), omega_sq, schedule, gamma_d)
    }

    /// Envelope values computed elsewhere, one per detuning.
    pub fn from_envelope(deltas: Vec<f64>, omega_sq: Vec<f64>, schedule: &DriveSchedule, gamma_d: f64) -> Result<Self> {
        require_complementary(schedule, "gvv_spectrum")?;
        if !(gamma_d >= 0.0) || !gamma_d.is_finite() {
            return Err(Error::invalid("gamma_d", "must be finite and non-negative"));
        }
        if deltas.len() != omega_sq.len() || deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("deltas", "need one finite detuning per envelope value"));
        }
        Ok(GvvSpectrum {
            deltas,
            omega_sq,
            omega: schedule.omega(),
            gamma_d,
        })
    }

    /// Linewidth `sqrt(gamma_d^2 + 4 Omega^2)` at axis point `i`.
    pub fn linewidth(&self, i: usize) -> f64 {
        libm::sqrt(self.gamma_d * self.gamma_d + 4.0 * self.omega_sq[i])
    }

    /// Signal at axis point `i` for control strength `omega_c`.
    pub fn value(&self, i: usize, omega_c: f64) -> f64 {
        let w2 = self.omega_sq[i];
        if w2 == 0.0 {
            return 0.0;
        }
        let gamma = self.linewidth(i);
        let d = self.deltas[i];
        w2 * (ladder_sum(d + 0.25 * omega_c, gamma, self.omega) + ladder_sum(d - 0.25 * omega_c, gamma, self.omega))
    }

    pub fn row(&self, omega_c: f64) -> Vec<f64> {
        (0..self.deltas.len()).map(|i| self.value(i, omega_c)).collect()
    }
}

pub fn gvv_spectrum(
    deltas: &[f64],
    params: &QutritParams,
    schedule: &DriveSchedule,
    gamma_d: f64,
    cutoffs: &GvvCutoffs,
) -> Result<Vec<f64>> {
    Ok(GvvSpectrum::new(deltas, params, schedule, gamma_d, cutoffs)?.row(params.omega_c))
}

fn require_complementary(schedule: &DriveSchedule, operation: &'static str) -> Result<()> {
    if schedule.scheme() != Scheme::Complementary {
        return Err(Error::UnsupportedScheme {
            operation,
            scheme: schedule.scheme(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz_to_angular;

    fn comp() -> DriveSchedule {
        DriveSchedule::new(Scheme::Complementary, 0.05).unwrap()
    }

    #[test]
    fn zero_control_leaves_bare_coupling() {
        let wp = mhz_to_angular(2.4);
        let p = QutritParams::lossless().with_drives(wp, 0.0);
        let c = gvv_coupling(0, &p, &comp(), &GvvCutoffs::default()).unwrap();
        assert!((c.p + wp / (4.0 * SQRT_2)).abs() < 1e-14 * wp);
        assert!((c.q - wp / (4.0 * SQRT_2)).abs() < 1e-14 * wp);
        assert!(c.sufficient);
    }

    #[test]
    fn ladder_sum_matches_direct_sum() {
        let omega = comp().omega();
        let gamma = mhz_to_angular(2.6);
        for x in [0.0, 13.0, -47.0, 130.0] {
            let cutoff = 200_000i64;
            // tail beyond the cutoff: 2 / (omega^2 cutoff)
            let direct: f64 = (-cutoff..=cutoff)
                .map(|n| 1.0 / ((x - n as f64 * omega).powi(2) + gamma * gamma))
                .sum::<f64>()
                + 2.0 / (omega * omega * cutoff as f64);
            let closed = ladder_sum(x, gamma, omega);
            assert!((closed - direct).abs() < 1e-9 * closed, "{x}: {closed} vs {direct}");
        }
    }

    #[test]
    fn resonance_ladders_mirror() {
        let g = ResonanceGrid::new(mhz_to_angular(40.0), comp().omega(), -4..=4, 1.0);
        for (i, n) in (-4i64..=4).enumerate() {
            let j = (-n + 4) as usize;
            assert!((g.lower[i] + g.upper[j]).abs() < 1e-9);
        }
        let within: Vec<f64> = g
            .positions_within(mhz_to_angular(-35.0), mhz_to_angular(35.0))
            .iter()
            .map(|x| crate::units::angular_to_mhz(*x))
            .collect();
        for (a, b) in within.iter().zip([-30.0, -30.0, -10.0, -10.0, 10.0, 10.0, 30.0, 30.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn insufficient_depth_rejected() {
        let p = QutritParams::lossless().with_drives(1.0, mhz_to_angular(400.0));
        let shallow = GvvCutoffs { q_max: 2, ..Default::default() };
        assert!(gvv_coupling(0, &p, &comp(), &shallow).is_err());
        assert!(gvv_coupling(0, &p, &DriveSchedule::unmodulated(), &GvvCutoffs::default()).is_err());
    }

    #[test]
    fn no_probe_no_signal() {
        let p = QutritParams::measured().with_control(mhz_to_angular(40.0));
        let axis: Vec<f64> = (-5..=5).map(|i| mhz_to_angular(4.0 * i as f64)).collect();
        let row = gvv_spectrum(&axis, &p, &comp(), mhz_to_angular(2.6), &GvvCutoffs::default()).unwrap();
        assert!(row.iter().all(|v| *v == 0.0));
    }
}
