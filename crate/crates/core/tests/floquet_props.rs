//! Floquet-matrix backend: block structure, spectral properties and the
//! direct time-domain oracle.

use tdgrating_core::coherent::long_time_average;
use tdgrating_core::floquet::{
    build_floquet_matrix, diagonalize, excited_population, floquet_signal, fourier_blocks, time_averaged_population,
};
use tdgrating_core::lindblad::hamiltonian_at;
use tdgrating_core::sweep::find_peaks;
use tdgrating_core::units::{dbm_to_rabi, mhz_to_angular};
use tdgrating_core::{DriveSchedule, QutritParams, Scheme};

const TAU: f64 = 0.05;

fn sched(scheme: Scheme) -> DriveSchedule {
    DriveSchedule::new(scheme, TAU).unwrap()
}

fn paper(delta_mhz: f64, control_mhz: f64) -> QutritParams {
    QutritParams::lossless()
        .with_delta(mhz_to_angular(delta_mhz))
        .with_drives(dbm_to_rabi(-31.0), mhz_to_angular(control_mhz))
}

fn axis(count: usize) -> Vec<f64> {
    (0..count).map(|i| -60.0 + 120.0 * i as f64 / (count - 1) as f64).collect()
}

#[test]
fn undriven_blocks_are_diagonal() {
    let b = fourier_blocks(&QutritParams::lossless().with_delta(2.0), &sched(Scheme::Complementary), 9).unwrap();
    assert_eq!(b.block(0), [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    for k in 1..=9 {
        assert_eq!(b.block(k), [[0.0; 3]; 3]);
    }
}

#[test]
fn block_values() {
    let p = paper(3.0, 40.0);
    let b = fourier_blocks(&p, &sched(Scheme::Complementary), 6).unwrap();
    assert_eq!(b.block(2), [[0.0; 3]; 3]);
    assert!((b.block(0)[0][1] + p.omega_p / 4.0).abs() < 1e-15);
    assert!((b.block(0)[1][2] + p.omega_c / 4.0).abs() < 1e-15);
    // index 2n - 1 = 3, n = 2
    let k3 = b.block(3);
    assert!((k3[0][1] - p.omega_p / (3.0 * std::f64::consts::PI) / 2.0).abs() < 1e-15);
    assert!((k3[1][2] + p.omega_c / (3.0 * std::f64::consts::PI) / 2.0).abs() < 1e-15);
    for k in 1..=6 {
        assert_eq!(b.block(k), b.block(-k));
    }
}

#[test]
fn fourier_resummation_reproduces_the_square_wave() {
    let p = paper(7.0, 40.0).with_drives(mhz_to_angular(20.0), mhz_to_angular(40.0));
    for scheme in [Scheme::Complementary, Scheme::Simultaneous] {
        let s = sched(scheme);
        let b = fourier_blocks(&p, &s, 100).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..4000 {
            let t = (i as f64 + 0.5) / 4000.0 * TAU;
            // the series is centred on the probe half
            let shifted = (t + TAU / 4.0) % TAU;
            if [0.0, TAU / 2.0, TAU].iter().any(|e| (shifted - e).abs() < TAU / 50.0) {
                continue;
            }
            let a = b.resum(t);
            let h = hamiltonian_at(&p, &s, shifted);
            for r in 0..3 {
                for c in 0..3 {
                    num += (a[r][c] - h[r][c]).powi(2);
                    den += h[r][c].powi(2);
                }
            }
        }
        assert!((num / den).sqrt() < 0.02, "{scheme}");
    }
}

#[test]
fn undriven_matrix_spectrum() {
    let delta = mhz_to_angular(3.0);
    let s = sched(Scheme::Complementary);
    let m = build_floquet_matrix(&fourier_blocks(&QutritParams::lossless().with_delta(delta), &s, 2).unwrap(), 1).unwrap();
    let d = diagonalize(&m).unwrap();
    let w = s.omega();
    let mut want: Vec<f64> = [-w, 0.0, w]
        .iter()
        .flat_map(|n| [n - delta / 2.0, n + delta / 2.0, n + delta / 2.0])
        .collect();
    want.sort_by(f64::total_cmp);
    for (a, b) in d.quasi_energies.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12 * w);
    }
    assert_eq!(excited_population(&d), 0.0);
}

#[test]
fn decomposition_is_orthonormal_and_complete() {
    let p = paper(10.0, 40.0);
    let m = build_floquet_matrix(&fourier_blocks(&p, &sched(Scheme::Complementary), 40).unwrap(), 20).unwrap();
    let d = diagonalize(&m).unwrap();
    let n = d.dim;
    let norm = m.data.iter().fold(0.0f64, |a, v| a.max(v.abs())) * n as f64;
    for j in 0..n {
        for k in j..n {
            let dot: f64 = (0..n).map(|i| d.vectors[i * n + j] * d.vectors[i * n + k]).sum();
            assert!((dot - if j == k { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
        let res: f64 = (0..n)
            .map(|i| {
                let hv: f64 = (0..n).map(|c| m.data[i * n + c] * d.vectors[c * n + j]).sum();
                (hv - d.quasi_energies[j] * d.vectors[i * n + j]).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-9 * norm);
    }
    for beta in 0..3 {
        let total: f64 = (0..3).map(|a| time_averaged_population(&d, a, beta).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

/// Interior quasi-energies come in copies spaced by the drive frequency. The
/// truncation error shrinks roughly as control^2 / n_c^3.
fn ladder_gap(control_mhz: f64, n_c: usize) -> f64 {
    let s = sched(Scheme::Complementary);
    let w = s.omega();
    let b = fourier_blocks(&paper(7.3, control_mhz), &s, 2 * n_c).unwrap();
    let q = diagonalize(&build_floquet_matrix(&b, n_c).unwrap()).unwrap().quasi_energies;
    q.iter()
        .filter(|x| x.abs() < n_c as f64 / 4.0 * w)
        .map(|x| q.iter().map(|y| (y - x - w).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        / w
}

#[test]
fn interior_quasi_energies_repeat_modulo_the_drive() {
    assert!(ladder_gap(20.0, 40) < 1e-6);
    let coarse = ladder_gap(40.0, 20);
    let fine = ladder_gap(40.0, 40);
    assert!(fine < coarse / 4.0, "{coarse} -> {fine}");
}

#[test]
fn cutoff_stability_and_direct_oracle() {
    let s = sched(Scheme::Complementary);
    for d in axis(25) {
        let p = paper(d, 40.0);
        let f40 = floquet_signal(&p, &s, 40).unwrap();
        let f50 = floquet_signal(&p, &s, 50).unwrap();
        let direct = long_time_average(&p, &s, 200).unwrap();
        assert!((f40 - f50).abs() < 1e-3, "d={d}");
        assert!((f40 - (direct[1] + direct[2])).abs() < 1e-3, "d={d}");
    }
}

#[test]
fn simultaneous_blocks_agree_with_direct_oracle() {
    let s = sched(Scheme::Simultaneous);
    for d in [-25.0, -10.0, 0.0, 10.0, 33.0] {
        let p = paper(d, 40.0);
        let direct = long_time_average(&p, &s, 200).unwrap();
        assert!((floquet_signal(&p, &s, 40).unwrap() - (direct[1] + direct[2])).abs() < 1e-3, "d={d}");
    }
}

#[test]
fn spectrum_is_even_in_detuning() {
    let s = sched(Scheme::Complementary);
    for d in [2.5, 10.0, 17.0, 41.0] {
        let a = floquet_signal(&paper(d, 40.0), &s, 40).unwrap();
        let b = floquet_signal(&paper(-d, 40.0), &s, 40).unwrap();
        assert!((a - b).abs() < 1e-6, "d={d}");
    }
}

#[test]
fn peaks_sit_on_the_resonance_grid() {
    let s = sched(Scheme::Complementary);
    let deltas: Vec<f64> = (0..=160).map(|i| -40.0 + 0.5 * i as f64).collect();
    let row: Vec<f64> = deltas.iter().map(|d| floquet_signal(&paper(*d, 40.0), &s, 20).unwrap()).collect();
    let peaks = find_peaks(&deltas, &row, 0.05).unwrap();
    assert!(!peaks.is_empty());
    for p in peaks {
        // control/4 + n * 20 MHz with control 40 MHz
        let off = (p.center - 10.0).rem_euclid(20.0);
        assert!(off.min(20.0 - off) < 1.0, "peak at {}", p.center);
    }
}

#[test]
fn cutoff_and_scheme_are_checked() {
    let p = paper(0.0, 40.0);
    assert!(fourier_blocks(&p, &DriveSchedule::unmodulated(), 4).is_err());
    let b = fourier_blocks(&p, &sched(Scheme::Complementary), 4).unwrap();
    assert!(build_floquet_matrix(&b, 3).is_err());
    assert!(build_floquet_matrix(&b, 0).is_err());
}
