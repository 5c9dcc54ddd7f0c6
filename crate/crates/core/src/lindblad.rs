//! Master-equation dynamics of the driven qutrit.
//!
//! Two integrators share one right-hand side. [`evolve`] applies classical
//! RK4 step by step. [`steady_state_signal`] uses the fact that RK4 on a
//! linear equation with a constant generator `L` is the fixed matrix
//! `M = sum_{k<=4} (hL)^k / k!`; it precomputes `M^n` and `sum_k M^k` for each
//! constant half period, so every period costs a few 9x9 matrix-vector
//! products while producing the same iterates as stepping.

use num_complex::Complex64 as C;

use crate::linalg::hermitian_eigen;
use crate::params::{DriveSchedule, Envelope, QutritParams};
use crate::{Error, Result};

pub type Hamiltonian = [[f64; 3]; 3];
pub type Matrix3 = [[C; 3]; 3];

type Matrix9 = [[C; 9]; 9];
type Vector9 = [C; 9];

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Default number of RK4 steps per modulation period.
pub const STEPS_PER_PERIOD: usize = 500;

/// Three-level density matrix in the basis `|0>, |1>, |2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    rho: Matrix3,
}

impl DensityMatrix {
    /// Validated constructor.
    pub fn new(rho: Matrix3) -> Result<Self> {
        let dm = DensityMatrix { rho };
        dm.validate()?;
        Ok(dm)
    }

    /// No validation; for states produced by the integrators.
    pub fn from_matrix_unchecked(rho: Matrix3) -> Self {
        DensityMatrix { rho }
    }

    pub fn ground() -> Self {
        Self::pure_level(0)
    }

    /// `|k><k|`; panics unless `k < 3`.
    pub fn pure_level(k: usize) -> Self {
        let mut rho = [[ZERO; 3]; 3];
        rho[k][k] = ONE;
        DensityMatrix { rho }
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.rho
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.rho[0][0].re, self.rho[1][1].re, self.rho[2][2].re]
    }

    /// `rho_11 + rho_22`.
    pub fn excited_population(&self) -> f64 {
        self.rho[1][1].re + self.rho[2][2].re
    }

    pub fn trace(&self) -> C {
        self.rho[0][0] + self.rho[1][1] + self.rho[2][2]
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += (self.rho[i][j] * self.rho[j][i]).re;
            }
        }
        acc
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut flat = [ZERO; 9];
        for i in 0..3 {
            for j in 0..3 {
                flat[3 * i + j] = 0.5 * (self.rho[i][j] + self.rho[j][i].conj());
            }
        }
        Ok(hermitian_eigen(&flat, 3)?.values[0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("rho", "entries must be finite"));
        }
        if self.hermiticity_error() > HERMITICITY_TOL {
            return Err(Error::invalid("rho", "not Hermitian"));
        }
        if (self.trace() - ONE).norm() > TRACE_TOL {
            return Err(Error::invalid("rho", "trace differs from 1"));
        }
        if self.min_eigenvalue()? < -POSITIVITY_TOL {
            return Err(Error::invalid("rho", "not positive semidefinite"));
        }
        Ok(())
    }

    fn to_vector(self) -> Vector9 {
        let mut v = [ZERO; 9];
        for i in 0..3 {
            for j in 0..3 {
                v[3 * i + j] = self.rho[i][j];
            }
        }
        v
    }

    fn from_vector(v: &Vector9) -> Self {
        let mut rho = [[ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rho[i][j] = v[3 * i + j];
            }
        }
        DensityMatrix { rho }
    }
}

/// Hamiltonian for a given on/off state; an enabled field contributes half its
/// Rabi strength to the off-diagonal.
pub fn hamiltonian_for(params: &QutritParams, envelope: Envelope) -> Hamiltonian {
    let (ep, ec) = envelope.factors();
    let half_delta = 0.5 * params.delta;
    let wp = 0.5 * ep * params.omega_p;
    let wc = 0.5 * ec * params.omega_c;
    [[-half_delta, -wp, 0.0], [-wp, half_delta, -wc], [0.0, -wc, half_delta]]
}

pub fn hamiltonian_at(params: &QutritParams, schedule: &DriveSchedule, t: f64) -> Hamiltonian {
    hamiltonian_for(params, schedule.envelope(t))
}

/// `d rho / dt` for a fixed Hamiltonian.
pub fn lindblad_rhs(h: &Hamiltonian, params: &QutritParams, rho: &Matrix3) -> Matrix3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut comm = ZERO;
            for k in 0..3 {
                comm += rho[k][j] * h[i][k] - rho[i][k] * h[k][j];
            }
            // -i [H, rho]
            out[i][j] = C::new(comm.im, -comm.re);
        }
    }
    decay(&mut out, rho, 1, 0, params.gamma_10);
    decay(&mut out, rho, 2, 1, params.gamma_21);
    dephase(&mut out, rho, 1, params.gamma_11);
    dephase(&mut out, rho, 2, params.gamma_22);
    out
}

/// Collapse `|to><from|` at `rate`.
fn decay(out: &mut Matrix3, rho: &Matrix3, from: usize, to: usize, rate: f64) {
    out[to][to] += rho[from][from] * rate;
    for k in 0..3 {
        out[from][k] -= rho[from][k] * (0.5 * rate);
        out[k][from] -= rho[k][from] * (0.5 * rate);
    }
}

/// `rate (2 P rho P - P rho - rho P)` with `P = |level><level|`.
fn dephase(out: &mut Matrix3, rho: &Matrix3, level: usize, rate: f64) {
    for k in 0..3 {
        if k != level {
            out[level][k] -= rho[level][k] * rate;
            out[k][level] -= rho[k][level] * rate;
        }
    }
}

fn rk4_step(h: &Hamiltonian, params: &QutritParams, rho: &Matrix3, dt: f64) -> Matrix3 {
    let axpy = |a: &Matrix3, b: &Matrix3, s: f64| -> Matrix3 {
        let mut r = *a;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += b[i][j] * s;
            }
        }
        r
    };
    let k1 = lindblad_rhs(h, params, rho);
    let k2 = lindblad_rhs(h, params, &axpy(rho, &k1, 0.5 * dt));
    let k3 = lindblad_rhs(h, params, &axpy(rho, &k2, 0.5 * dt));
    let k4 = lindblad_rhs(h, params, &axpy(rho, &k3, dt));
    let mut out = *rho;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * (dt / 6.0);
        }
    }
    out
}

/// Number of `dt` steps in `interval`, requiring exact alignment.
pub fn aligned_steps(interval: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", "step must be positive"));
    }
    let steps = libm::round(interval / dt);
    if steps < 1.0 || libm::fabs(steps * dt - interval) > 1e-9 * interval {
        return Err(Error::MisalignedStep { dt, interval });
    }
    Ok(steps as usize)
}

/// Classical RK4 from `t = 0` to `t_end` with step `dt`. Each step uses the
/// Hamiltonian of the interval it covers.
pub fn evolve(
    rho0: &DensityMatrix,
    params: &QutritParams,
    schedule: &DriveSchedule,
    t_end: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    evolve_from(rho0, params, schedule, 0.0, t_end, dt)
}

/// As [`evolve`], starting the clock at `t_start` (a multiple of `dt`).
pub fn evolve_from(
    rho0: &DensityMatrix,
    params: &QutritParams,
    schedule: &DriveSchedule,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    rho0.validate()?;
    params.validate()?;
    if schedule.scheme().is_modulated() {
        aligned_steps(0.5 * schedule.tau(), dt)?;
    } else if !(dt > 0.0) {
        return Err(Error::invalid("dt", "step must be positive"));
    }
    if !(t_start >= 0.0) || !(t_end >= t_start) {
        return Err(Error::invalid("t_end", "need 0 <= t_start <= t_end"));
    }
    let first = libm::round(t_start / dt);
    let last = libm::round(t_end / dt);
    if libm::fabs(first * dt - t_start) > 1e-9 * dt.max(t_start)
        || libm::fabs(last * dt - t_end) > 1e-9 * dt.max(t_end)
    {
        return Err(Error::invalid("t_end", "times must be whole multiples of dt"));
    }
    let mut rho = *rho0.matrix();
    let mut k = first as u64;
    let stop = last as u64;
    while k < stop {
        let h = hamiltonian_at(params, schedule, (k as f64 + 0.5) * dt);
        rho = rk4_step(&h, params, &rho, dt);
        k += 1;
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Step in µs; `None` means `tau / 500`.
    pub dt: Option<f64>,
    /// Relative change between consecutive period averages that counts as
    /// converged.
    pub tol: f64,
    pub max_periods: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            dt: None,
            tol: 1e-4,
            max_periods: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateResult {
    /// Period average of `rho_11 + rho_22`.
    pub signal: f64,
    /// Period averages of `rho_00`, `rho_11`, `rho_22`.
    pub populations: [f64; 3],
    pub periods_used: usize,
    pub converged: bool,
    /// State at the end of the last period.
    pub rho_final: DensityMatrix,
}

/// Integrates from the ground state period by period until the period average
/// of `rho_11 + rho_22` settles. Averages use the trapezoid rule on the step
/// grid. Non-convergence is reported through `converged`, not as an error.
pub fn steady_state_signal(
    params: &QutritParams,
    schedule: &DriveSchedule,
    options: &SteadyStateOptions,
) -> Result<SteadyStateResult> {
    params.validate()?;
    if options.max_periods < 2 {
        return Err(Error::invalid("max_periods", "need at least 2 periods"));
    }
    if !(options.tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let tau = schedule.tau();
    let dt = options.dt.unwrap_or(tau / STEPS_PER_PERIOD as f64);
    let segments = schedule.segments();
    let mut maps = [SegmentMap::identity(); 2];
    let mut total_steps = 0usize;
    for (map, segment) in maps.iter_mut().zip(segments.iter()) {
        let steps = aligned_steps(segment.duration, dt)?;
        let h = hamiltonian_for(params, segment.envelope);
        *map = SegmentMap::new(&step_matrix(&h, params, dt), steps);
        total_steps += steps;
    }
    let weight = 1.0 / total_steps as f64;

    let mut x = DensityMatrix::ground().to_vector();
    let mut previous: Option<f64> = None;
    let mut result = None;
    for period in 1..=options.max_periods {
        let mut avg = [ZERO; 9];
        for map in &maps {
            let next = matvec(&map.power, &x);
            let partial = matvec(&map.sum, &x);
            for i in 0..9 {
                avg[i] += (partial[i] + 0.5 * (next[i] - x[i])) * weight;
            }
            x = next;
        }
        let populations = [avg[0].re, avg[4].re, avg[8].re];
        let signal = populations[1] + populations[2];
        let converged = match previous {
            Some(p) => libm::fabs(signal - p) <= options.tol * libm::fabs(signal).max(libm::fabs(p)),
            None => false,
        };
        result = Some(SteadyStateResult {
            signal,
            populations,
            periods_used: period,
            converged,
            rho_final: DensityMatrix::from_vector(&x),
        });
        if converged {
            break;
        }
        previous = Some(signal);
    }
    Ok(result.expect("max_periods >= 2"))
}

/// `rho_22 / rho_11` predicted for a constant drive with a weak probe.
pub fn steady_state_ratio(params: &QutritParams) -> f64 {
    let wc2 = params.omega_c * params.omega_c;
    wc2 / (ratio_scale(params) * ratio_scale(params) + wc2)
}

/// Control strength at which the steady-state ratio is one half:
/// `sqrt(2 Gamma gamma_21)`.
pub fn ratio_scale(params: &QutritParams) -> f64 {
    libm::sqrt(2.0 * params.total_gamma() * params.gamma_21)
}

/// `T = A * signal`.
pub fn transmission(signal: f64, norm_a: f64) -> Result<f64> {
    if !(norm_a > 0.0) || !norm_a.is_finite() {
        return Err(Error::invalid("norm_a", "normalization constant must be positive"));
    }
    Ok(norm_a * signal)
}

/// The `A` that maps the largest finite value to 1.
pub fn normalization_constant(values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::invalid("values", "need a positive maximum to normalize"));
    }
    Ok(1.0 / max)
}

/// Superoperator of [`lindblad_rhs`] acting on row-major vectorized `rho`.
fn liouvillian(h: &Hamiltonian, params: &QutritParams) -> Matrix9 {
    let mut l = [[ZERO; 9]; 9];
    for a in 0..3 {
        for b in 0..3 {
            let mut basis = [[ZERO; 3]; 3];
            basis[a][b] = ONE;
            let image = lindblad_rhs(h, params, &basis);
            for i in 0..3 {
                for j in 0..3 {
                    l[3 * i + j][3 * a + b] = image[i][j];
                }
            }
        }
    }
    l
}

/// One RK4 step as a matrix: `I + X (I + X/2 (I + X/3 (I + X/4)))`, `X = dt L`.
fn step_matrix(h: &Hamiltonian, params: &QutritParams, dt: f64) -> Matrix9 {
    let mut x = liouvillian(h, params);
    for row in &mut x {
        for z in row.iter_mut() {
            *z *= dt;
        }
    }
    let mut t = identity();
    for k in [4.0, 3.0, 2.0, 1.0] {
        let mut next = matmul(&x, &t);
        for (i, row) in next.iter_mut().enumerate() {
            for z in row.iter_mut() {
                *z /= k;
            }
            row[i] += ONE;
        }
        t = next;
    }
    t
}

/// `M^n` and `sum_{k<n} M^k` for one constant stretch.
#[derive(Clone, Copy)]
struct SegmentMap {
    power: Matrix9,
    sum: Matrix9,
}

impl SegmentMap {
    fn identity() -> Self {
        SegmentMap {
            power: identity(),
            sum: [[ZERO; 9]; 9],
        }
    }

    fn new(step: &Matrix9, steps: usize) -> Self {
        let mut acc = SegmentMap::identity();
        let mut base = SegmentMap {
            power: *step,
            sum: identity(),
        };
        let mut remaining = steps;
        while remaining > 0 {
            if remaining & 1 == 1 {
                acc = acc.then(&base);
            }
            remaining >>= 1;
            if remaining > 0 {
                base = base.then(&base);
            }
        }
        acc
    }

    /// `a` steps followed by `b` steps of the same matrix.
    fn then(&self, other: &SegmentMap) -> SegmentMap {
        let mut sum = matmul(&self.power, &other.sum);
        for (row, add) in sum.iter_mut().zip(self.sum.iter()) {
            for (z, a) in row.iter_mut().zip(add.iter()) {
                *z += a;
            }
        }
        SegmentMap {
            power: matmul(&self.power, &other.power),
            sum,
        }
    }
}

fn identity() -> Matrix9 {
    let mut m = [[ZERO; 9]; 9];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

fn matmul(a: &Matrix9, b: &Matrix9) -> Matrix9 {
    let mut out = [[ZERO; 9]; 9];
    for i in 0..9 {
        for k in 0..9 {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..9 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn matvec(a: &Matrix9, x: &Vector9) -> Vector9 {
    let mut out = [ZERO; 9];
    for i in 0..9 {
        let mut acc = ZERO;
        for k in 0..9 {
            acc += a[i][k] * x[k];
        }
        out[i] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Scheme;
    use crate::units::mhz_to_angular;

    fn weak_probe(delta_mhz: f64, control_mhz: f64) -> QutritParams {
        QutritParams::measured()
            .with_delta(mhz_to_angular(delta_mhz))
            .with_drives(mhz_to_angular(1.0), mhz_to_angular(control_mhz))
    }

    #[test]
    fn hamiltonian_entries() {
        let p = weak_probe(3.0, 40.0);
        let h = hamiltonian_at(&p, &DriveSchedule::unmodulated(), 0.0);
        assert!((h[1][2] + mhz_to_angular(20.0)).abs() < 1e-12);
        assert_eq!(h[0][2], 0.0);
        assert_eq!(h[2][0], 0.0);
        let idle = hamiltonian_for(&p, Envelope::NONE);
        assert_eq!(idle[0][1], 0.0);
        assert_eq!(idle[1][2], 0.0);
    }

    #[test]
    fn frozen_without_rates_or_drives() {
        let p = QutritParams::lossless().with_delta(mhz_to_angular(7.0));
        let sched = DriveSchedule::new(Scheme::Complementary, 0.05).unwrap();
        let start = DensityMatrix::pure_level(1);
        let end = evolve(&start, &p, &sched, 0.5, 1e-4).unwrap();
        assert_eq!(end, start);
    }

    #[test]
    fn free_decay_of_first_level() {
        let p = QutritParams::measured();
        let start = DensityMatrix::pure_level(1);
        let t = 0.2;
        let end = evolve(&start, &p, &DriveSchedule::unmodulated(), t, 1e-4).unwrap();
        let expected = libm::exp(-p.gamma_10 * t);
        assert!((end.populations()[1] - expected).abs() < 1e-10);
    }

    #[test]
    fn misaligned_step_rejected() {
        let p = weak_probe(0.0, 20.0);
        let sched = DriveSchedule::new(Scheme::Simultaneous, 0.05).unwrap();
        let err = evolve(&DensityMatrix::ground(), &p, &sched, 0.03, 0.03e-2 * 1.37).unwrap_err();
        assert!(matches!(err, Error::MisalignedStep { .. }));
        let opts = SteadyStateOptions { dt: Some(0.0003), ..Default::default() };
        assert!(steady_state_signal(&p, &sched, &opts).is_err());
    }

    #[test]
    fn step_matrix_matches_stepping() {
        let p = weak_probe(4.0, 30.0);
        let sched = DriveSchedule::new(Scheme::Complementary, 0.05).unwrap();
        let opts = SteadyStateOptions { dt: Some(1e-4), tol: 1e-12, max_periods: 3 };
        let fast = steady_state_signal(&p, &sched, &opts).unwrap();
        let slow = evolve(&DensityMatrix::ground(), &p, &sched, 3.0 * 0.05, 1e-4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d = fast.rho_final.matrix()[i][j] - slow.matrix()[i][j];
                assert!(d.norm() < 1e-12, "{i}{j}: {d}");
            }
        }
    }

    #[test]
    fn no_probe_means_no_signal() {
        let p = weak_probe(2.0, 30.0).with_drives(0.0, mhz_to_angular(30.0));
        let r = steady_state_signal(&p, &DriveSchedule::unmodulated(), &Default::default()).unwrap();
        assert_eq!(r.signal, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn too_few_periods_rejected() {
        let opts = SteadyStateOptions { max_periods: 1, ..Default::default() };
        assert!(steady_state_signal(&weak_probe(0.0, 1.0), &DriveSchedule::unmodulated(), &opts).is_err());
    }

    #[test]
    fn ratio_limits() {
        let p = QutritParams::measured().with_control(1e9);
        assert!((steady_state_ratio(&p) - 1.0).abs() < 1e-9);
        assert_eq!(steady_state_ratio(&QutritParams::measured()), 0.0);
    }

    #[test]
    fn transmission_is_linear() {
        assert_eq!(transmission(0.0, 3.0).unwrap(), 0.0);
        assert!((transmission(0.3, 2.0).unwrap() - 0.6).abs() < 1e-15);
        assert!(transmission(0.3, 0.0).is_err());
        let a = normalization_constant(&[0.1, 0.4, 0.2]).unwrap();
        assert!((transmission(0.4, a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation_catches_bad_states() {
        let mut m = *DensityMatrix::ground().matrix();
        m[0][1] = C::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        let mut m = *DensityMatrix::ground().matrix();
        m[0][0] = C::new(0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let mut m = [[ZERO; 3]; 3];
        m[0][0] = C::new(1.5, 0.0);
        m[1][1] = C::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }
}
