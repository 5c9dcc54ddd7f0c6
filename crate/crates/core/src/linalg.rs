//! Dense eigensolvers for real symmetric and complex Hermitian matrices.
//!
//! Matrices are row-major slices of length `n * n`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    /// Component `row` of eigenvector `j`.
    #[inline]
    pub fn component(&self, row: usize, j: usize) -> f64 {
        self.vectors[row * self.n + j]
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|row| self.component(row, j)).collect()
    }
}

/// Householder reduction to tridiagonal form followed by implicit QL.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    check_square(a.len(), n, a.iter().all(|v| v.is_finite()))?;
    if n == 0 {
        return Ok(SymmetricEigen { n, values: Vec::new(), vectors: Vec::new() });
    }
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, n);
    tql2(&mut v, &mut d, &mut e, n)?;
    Ok(sorted(n, d, v))
}

/// Cyclic Jacobi rotations; preferred for very small matrices.
pub fn jacobi_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    check_square(a.len(), n, a.iter().all(|v| v.is_finite()))?;
    const MAX_SWEEPS: usize = 64;
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        let off = libm::sqrt(off);
        if off <= 1e-300 || off <= f64::EPSILON * 1e-3 * scale {
            let values = (0..n).map(|i| m[i * n + i]).collect();
            return Ok(sorted(n, values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if sweep + 1 == MAX_SWEEPS {
            break;
        }
    }
    Err(Error::EigenNoConvergence { iterations: MAX_SWEEPS })
}

/// Eigenpairs of a complex Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub n: usize,
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<Complex64>,
}

impl HermitianEigen {
    #[inline]
    pub fn component(&self, row: usize, j: usize) -> Complex64 {
        self.vectors[row * self.n + j]
    }
}

/// Diagonalizes `A = X + iY` through the real symmetric embedding
/// `[[X, -Y], [Y, X]]`, whose spectrum is that of `A` doubled.
pub fn hermitian_eigen(a: &[Complex64], n: usize) -> Result<HermitianEigen> {
    check_square(a.len(), n, a.iter().all(|z| z.re.is_finite() && z.im.is_finite()))?;
    let m = 2 * n;
    let mut big = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            big[i * m + j] = z.re;
            big[(i + n) * m + j + n] = z.re;
            big[i * m + j + n] = -z.im;
            big[(i + n) * m + j] = z.im;
        }
    }
    let real = if m < 16 { jacobi_eigen(&big, m)? } else { symmetric_eigen(&big, m)? };
    let mut values = Vec::with_capacity(n);
    let mut accepted: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..m {
        if accepted.len() == n {
            break;
        }
        let mut z: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(real.component(i, j), real.component(i + n, j)))
            .collect();
        for u in &accepted {
            let overlap: Complex64 = u.iter().zip(&z).map(|(ui, zi)| ui.conj() * zi).sum();
            for (zi, ui) in z.iter_mut().zip(u) {
                *zi -= overlap * ui;
            }
        }
        let norm = libm::sqrt(z.iter().map(|c| c.norm_sqr()).sum::<f64>());
        // Each complex eigenvector appears twice (as z and i z); keep one.
        if norm > 0.5 {
            for zi in &mut z {
                *zi /= norm;
            }
            accepted.push(z);
            values.push(real.values[j]);
        }
    }
    if accepted.len() != n {
        return Err(Error::EigenNoConvergence { iterations: 0 });
    }
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (j, u) in accepted.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + j] = u[i];
        }
    }
    Ok(HermitianEigen { n, values, vectors })
}

fn check_square(len: usize, n: usize, finite: bool) -> Result<()> {
    if len != n * n {
        return Err(Error::invalid("matrix", "length must be n * n"));
    }
    if !finite {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    Ok(())
}

fn sorted(n: usize, values: Vec<f64>, vectors: Vec<f64>) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for row in 0..n {
            out[row * n + new] = vectors[row * n + old];
        }
    }
    SymmetricEigen {
        n,
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: out,
    }
}

fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in j + 1..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    let max_iterations = 30 * n.max(1);
    let mut total = 0;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                total += 1;
                if total > max_iterations {
                    return Err(Error::EigenNoConvergence { iterations: total - 1 });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let row = k * n;
                        h = v[row + i + 1];
                        v[row + i + 1] = s * v[row + i] + c * h;
                        v[row + i] = c * v[row + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
