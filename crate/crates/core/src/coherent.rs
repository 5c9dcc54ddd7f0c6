//! Exact dissipationless evolution under the piecewise-constant Hamiltonian.
//!
//! Every half period is propagated exactly through the eigenvectors of its
//! (real symmetric) Hamiltonian, so no time step enters. This is the reference
//! the grating formulas and the Floquet matrix are checked against.

use alloc::vec::Vec;

use num_complex::Complex64 as C;

use crate::linalg::{hermitian_eigen, jacobi_eigen, SymmetricEigen};
use crate::lindblad::{hamiltonian_for, Hamiltonian};
use crate::params::{DriveSchedule, QutritParams};
use crate::{Error, Result};

pub type Unitary = [[C; 3]; 3];
pub type State = [C; 3];

const ZERO: C = C { re: 0.0, im: 0.0 };

/// Eigen-decomposed constant Hamiltonian, ready to propagate for any time.
#[derive(Debug, Clone)]
pub struct ConstantPropagator {
    eigen: SymmetricEigen,
}

impl ConstantPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let flat: Vec<f64> = h.iter().flatten().copied().collect();
        Ok(ConstantPropagator {
            eigen: jacobi_eigen(&flat, 3)?,
        })
    }

    /// `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> Unitary {
        let phases: [C; 3] = core::array::from_fn(|k| {
            let (s, c) = libm::sincos(-self.eigen.values[k] * t);
            C::new(c, s)
        });
        let mut u = [[ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += phases[k] * (self.eigen.component(i, k) * self.eigen.component(j, k));
                }
                u[i][j] = acc;
            }
        }
        u
    }
}

/// `exp(-i H t)` for a constant Hamiltonian.
pub fn propagator(h: &Hamiltonian, t: f64) -> Result<Unitary> {
    Ok(ConstantPropagator::new(h)?.unitary(t))
}

fn segment_propagators(params: &QutritParams, schedule: &DriveSchedule) -> Result<[(ConstantPropagator, f64); 2]> {
    params.validate()?;
    let [a, b] = schedule.segments();
    Ok([
        (ConstantPropagator::new(&hamiltonian_for(params, a.envelope))?, a.duration),
        (ConstantPropagator::new(&hamiltonian_for(params, b.envelope))?, b.duration),
    ])
}

/// Propagator over one full period starting at `t = 0`.
pub fn period_propagator(params: &QutritParams, schedule: &DriveSchedule) -> Result<Unitary> {
    let [(first, t1), (second, t2)] = segment_propagators(params, schedule)?;
    Ok(mul(&second.unitary(t2), &first.unitary(t1)))
}

/// Populations after exactly `periods` periods, starting in `|0>` at `t = 0`.
pub fn populations_after_periods(params: &QutritParams, schedule: &DriveSchedule, periods: u32) -> Result<[f64; 3]> {
    let u = period_propagator(params, schedule)?;
    let mut psi: State = [C::new(1.0, 0.0), ZERO, ZERO];
    for _ in 0..periods {
        psi = apply(&u, &psi);
    }
    Ok(psi.map(|z| z.norm_sqr()))
}

/// Infinite-time average of the populations, also averaged over the instant
/// within the period at which the system starts in `|0>`.
///
/// Uses the Floquet modes of the one-period propagator: the average is
/// `sum_g w_g * p_g` where `w_g` is the period average of `|<0|u_g(s)>|^2` and
/// `p_g` the period-averaged populations of mode `g`. Period averages use
/// composite Simpson quadrature with `samples_per_half` intervals per
/// constant half (rounded up to even). Assumes non-degenerate quasi-energies.
pub fn long_time_average(params: &QutritParams, schedule: &DriveSchedule, samples_per_half: usize) -> Result<[f64; 3]> {
    let segments = segment_propagators(params, schedule)?;
    let [(first, t1), (second, t2)] = &segments;
    let monodromy = mul(&second.unitary(*t2), &first.unitary(*t1));
    let modes = unitary_eigenvectors(&monodromy)?;
    let intervals = (samples_per_half.max(2) + 1) & !1;

    let mut total = [0.0; 3];
    for mode in &modes {
        let mut avg = [0.0; 3];
        let mut start = *mode;
        let period: f64 = segments.iter().map(|(_, d)| d).sum();
        for (prop, duration) in &segments {
            let h = duration / intervals as f64;
            for k in 0..=intervals {
                let w = if k == 0 || k == intervals {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let psi = apply(&prop.unitary(k as f64 * h), &start);
                for (a, z) in avg.iter_mut().zip(psi.iter()) {
                    *a += w * h / 3.0 * z.norm_sqr() / period;
                }
            }
            start = apply(&prop.unitary(*duration), &start);
        }
        for (t, a) in total.iter_mut().zip(avg.iter()) {
            *t += avg[0] * a;
        }
    }
    Ok(total)
}

/// Orthonormal eigenvectors of a 3x3 unitary matrix.
fn unitary_eigenvectors(u: &Unitary) -> Result<[State; 3]> {
    // K = (U + U^+)/2 + c (U - U^+)/(2i) shares U's eigenvectors and has
    // eigenvalues cos(phi) + c sin(phi); two mixing ratios guard against
    // accidental degeneracy.
    for c in [0.754_877_666_246_692_8, -1.324_717_957_244_746] {
        let mut k = [ZERO; 9];
        for i in 0..3 {
            for j in 0..3 {
                let sym = 0.5 * (u[i][j] + u[j][i].conj());
                let anti = (u[i][j] - u[j][i].conj()) * C::new(0.0, -0.5);
                k[3 * i + j] = sym + anti * c;
            }
        }
        let eig = hermitian_eigen(&k, 3)?;
        let vectors: [State; 3] = core::array::from_fn(|j| core::array::from_fn(|i| eig.component(i, j)));
        let worst = vectors
            .iter()
            .map(|v| {
                let uv = apply(u, v);
                let lambda: C = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
                uv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if worst < 1e-9 {
            return Ok(vectors);
        }
    }
    Err(Error::EigenNoConvergence { iterations: 0 })
}

fn mul(a: &Unitary, b: &Unitary) -> Unitary {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn apply(u: &Unitary, psi: &State) -> State {
    core::array::from_fn(|i| (0..3).map(|k| u[i][k] * psi[k]).sum())
}
