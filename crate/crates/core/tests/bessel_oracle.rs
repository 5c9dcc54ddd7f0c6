//! Bessel values against the integral representation
//! `J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt`, whose trapezoid rule
//! converges geometrically for a periodic integrand.

use proptest::prelude::*;
use tdgrating_core::bessel::{bessel_j, bessel_j_orders, MAX_ARGUMENT, MAX_ORDER};

fn integral_oracle(n: i64, x: f64) -> f64 {
    const NODES: usize = 1024;
    let h = std::f64::consts::TAU / NODES as f64;
    (0..NODES)
        .map(|k| {
            let t = k as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / NODES as f64
}

/// `sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)`, accurate for small `x`.
fn series_oracle(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[test]
fn values_at_zero() {
    assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    assert_eq!(bessel_j(-7, 0.0).unwrap(), 0.0);
}

#[test]
fn first_zero_of_order_zero() {
    assert!(bessel_j(0, 2.404826).unwrap().abs() < 1e-6);
    assert!(series_oracle(0, 2.404826).abs() < 1e-6);
}

#[test]
fn matches_power_series_for_small_arguments() {
    for n in 0..=20u32 {
        for x in [0.01, 0.3, 1.0, 2.5, 4.0] {
            let got = bessel_j(i64::from(n), x).unwrap();
            assert!((got - series_oracle(n, x)).abs() < 1e-14, "n={n} x={x}");
        }
    }
}

#[test]
fn matches_integral_on_a_grid() {
    let mut worst = 0.0f64;
    for n in -MAX_ORDER..=MAX_ORDER {
        for i in 0..=100 {
            let x = -MAX_ARGUMENT + i as f64;
            let err = (bessel_j(n, x).unwrap() - integral_oracle(n, x)).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst < 1e-12, "worst abs error {worst:e}");
}

#[test]
fn out_of_range_is_rejected() {
    assert!(bessel_j(MAX_ORDER + 1, 1.0).is_err());
    assert!(bessel_j(0, MAX_ARGUMENT + 1.0).is_err());
    assert!(bessel_j(0, f64::NAN).is_err());
}

proptest! {
    #[test]
    fn agrees_with_integral(n in -MAX_ORDER..=MAX_ORDER, x in -MAX_ARGUMENT..=MAX_ARGUMENT) {
        let err = (bessel_j(n, x).unwrap() - integral_oracle(n, x)).abs();
        prop_assert!(err < 1e-12, "n={} x={} err={:e}", n, x, err);
    }

    #[test]
    fn reflection(n in 0i64..=MAX_ORDER, x in -MAX_ARGUMENT..=MAX_ARGUMENT) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(bessel_j(-n, x).unwrap(), sign * bessel_j(n, x).unwrap());
    }

    #[test]
    fn three_term_recurrence(n in 1i64..MAX_ORDER, x in 0.5f64..MAX_ARGUMENT) {
        let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
        let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + n as f64 / x));
    }

    #[test]
    fn table_matches_single_values(x in -MAX_ARGUMENT..=MAX_ARGUMENT) {
        let table = bessel_j_orders(x, MAX_ORDER as usize).unwrap();
        for (n, v) in table.iter().enumerate() {
            prop_assert!((*v - bessel_j(n as i64, x).unwrap()).abs() < 1e-14);
        }
    }
}
