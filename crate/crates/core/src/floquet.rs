//! Floquet-matrix treatment of the square-wave drive.
//!
//! The Fourier series here takes its time origin at the centre of the
//! probe-carrying half period, i.e. `fourier(t) = piecewise(t + tau/4)`.
//! Period averages do not depend on the origin.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::lindblad::Hamiltonian;
use crate::linalg::symmetric_eigen;
use crate::params::{DriveSchedule, QutritParams, Scheme};
use crate::{Error, Result};

/// Fourier components `H^[k]` of the periodic Hamiltonian for `0 <= k <=
/// max_harmonic`; `H^[-k] = H^[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBlocks {
    pub omega: f64,
    blocks: Vec<Hamiltonian>,
}

impl FourierBlocks {
    pub fn max_harmonic(&self) -> usize {
        self.blocks.len() - 1
    }

    /// `H^[k]`, zero beyond the stored range.
    pub fn block(&self, k: i64) -> Hamiltonian {
        self.blocks
            .get(k.unsigned_abs() as usize)
            .copied()
            .unwrap_or([[0.0; 3]; 3])
    }

    /// `sum_k H^[k] exp(-i k omega t)` over the stored harmonics.
    pub fn resum(&self, t: f64) -> Hamiltonian {
        let mut h = self.blocks[0];
        for (k, block) in self.blocks.iter().enumerate().skip(1) {
            let c = 2.0 * libm::cos(k as f64 * self.omega * t);
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j] += c * block[i][j];
                }
            }
        }
        h
    }
}

pub fn fourier_blocks(params: &QutritParams, schedule: &DriveSchedule, max_harmonic: usize) -> Result<FourierBlocks> {
    params.validate()?;
    let same_sign = match schedule.scheme() {
        Scheme::Complementary => false,
        Scheme::Simultaneous => true,
        Scheme::Unmodulated => {
            return Err(Error::UnsupportedScheme {
                operation: "fourier_blocks",
                scheme: Scheme::Unmodulated,
            })
        }
    };
    let half_delta = 0.5 * params.delta;
    let mut blocks = vec![[[0.0; 3]; 3]; max_harmonic + 1];
    let (wp, wc) = (params.omega_p, params.omega_c);
    blocks[0] = [
        [-half_delta, -0.25 * wp, 0.0],
        [-0.25 * wp, half_delta, -0.25 * wc],
        [0.0, -0.25 * wc, half_delta],
    ];
    for k in (1..=max_harmonic).step_by(2) {
        // k = 2n - 1
        let n = (k + 1) / 2;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let scale = 1.0 / (k as f64 * PI);
        let probe = 0.5 * sign * wp * scale;
        let control = 0.5 * if same_sign { sign } else { -sign } * wc * scale;
        blocks[k][0][1] = probe;
        blocks[k][1][0] = probe;
        blocks[k][1][2] = control;
        blocks[k][2][1] = control;
    }
    Ok(FourierBlocks {
        omega: schedule.omega(),
        blocks,
    })
}

/// Truncated Floquet matrix over photon indices `-n_c..=n_c`; basis state
/// `|alpha, n>` sits at `3 (n + n_c) + alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    pub n_c: usize,
    pub omega: f64,
    pub dim: usize,
    /// Row-major, symmetric.
    pub data: Vec<f64>,
}

impl FloquetMatrix {
    #[inline]
    pub fn index(&self, alpha: usize, n: i64) -> usize {
        3 * (n + self.n_c as i64) as usize + alpha
    }
}

pub fn build_floquet_matrix(blocks: &FourierBlocks, n_c: usize) -> Result<FloquetMatrix> {
    if n_c < 1 {
        return Err(Error::invalid("n_c", "cutoff must be at least 1"));
    }
    if blocks.max_harmonic() < 2 * n_c {
        return Err(Error::invalid("blocks", "harmonics up to 2 n_c are required"));
    }
    let side = 2 * n_c + 1;
    let dim = 3 * side;
    let mut data = vec![0.0; dim * dim];
    for a in 0..side {
        for b in 0..side {
            let block = blocks.block(a as i64 - b as i64);
            for i in 0..3 {
                for j in 0..3 {
                    data[(3 * a + i) * dim + 3 * b + j] = block[i][j];
                }
            }
        }
        let photons = (a as f64 - n_c as f64) * blocks.omega;
        for i in 0..3 {
            data[(3 * a + i) * dim + 3 * a + i] += photons;
        }
    }
    Ok(FloquetMatrix {
        n_c,
        omega: blocks.omega,
        dim,
        data,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetDecomposition {
    pub n_c: usize,
    pub omega: f64,
    pub dim: usize,
    /// Ascending.
    pub quasi_energies: Vec<f64>,
    /// Row-major `dim x dim`; column `j` belongs to `quasi_energies[j]`.
    pub vectors: Vec<f64>,
}

impl FloquetDecomposition {
    #[inline]
    pub fn component(&self, alpha: usize, n: i64, j: usize) -> f64 {
        let row = 3 * (n + self.n_c as i64) as usize + alpha;
        self.vectors[row * self.dim + j]
    }
}

pub fn diagonalize(matrix: &FloquetMatrix) -> Result<FloquetDecomposition> {
    let eig = symmetric_eigen(&matrix.data, matrix.dim)?;
    Ok(FloquetDecomposition {
        n_c: matrix.n_c,
        omega: matrix.omega,
        dim: matrix.dim,
        quasi_energies: eig.values,
        vectors: eig.vectors,
    })
}

/// Long-time average of the population of `alpha` starting in `beta`:
/// `sum_j |<beta,0|j>|^2 sum_n |<alpha,n|j>|^2`.
pub fn time_averaged_population(decomp: &FloquetDecomposition, alpha: usize, beta: usize) -> Result<f64> {
    if alpha > 2 || beta > 2 {
        return Err(Error::invalid("level", "levels are 0, 1 and 2"));
    }
    Ok(level_weights(decomp, beta)
        .iter()
        .enumerate()
        .map(|(j, w)| w * photon_sum(decomp, alpha, j))
        .sum())
}

/// `rho_11 + rho_22` averaged over time, starting in `|0>`.
pub fn excited_population(decomp: &FloquetDecomposition) -> f64 {
    level_weights(decomp, 0)
        .iter()
        .enumerate()
        .map(|(j, w)| w * (photon_sum(decomp, 1, j) + photon_sum(decomp, 2, j)))
        .sum()
}

/// Convenience: blocks, matrix, diagonalization and excited population.
pub fn floquet_signal(params: &QutritParams, schedule: &DriveSchedule, n_c: usize) -> Result<f64> {
    let blocks = fourier_blocks(params, schedule, 2 * n_c)?;
    let decomp = diagonalize(&build_floquet_matrix(&blocks, n_c)?)?;
    Ok(excited_population(&decomp))
}

fn level_weights(decomp: &FloquetDecomposition, beta: usize) -> Vec<f64> {
    (0..decomp.dim)
        .map(|j| {
            let c = decomp.component(beta, 0, j);
            c * c
        })
        .collect()
}

fn photon_sum(decomp: &FloquetDecomposition, alpha: usize, j: usize) -> f64 {
    let n_c = decomp.n_c as i64;
    (-n_c..=n_c)
        .map(|n| {
            let c = decomp.component(alpha, n, j);
            c * c
        })
        .sum()
}
