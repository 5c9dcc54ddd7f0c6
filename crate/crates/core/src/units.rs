//! Unit conversions between the linear values quoted at the edges (MHz, ns,
//! dBm) and the angular rad/µs used by every computation.

use crate::{Error, Result};

pub const TWO_PI: f64 = core::f64::consts::TAU;

/// Power calibration constant `c` in `P[dBm] = 10 log10(c * Omega^2)`, with
/// `Omega` the linear Rabi frequency in MHz.
pub const DBM_CALIBRATION: f64 = 1.38e-4;

/// `f` in MHz (meaning `Omega / 2pi`) to angular rad/µs.
#[inline]
pub fn mhz_to_angular(mhz: f64) -> f64 {
    mhz * TWO_PI
}

#[inline]
pub fn angular_to_mhz(angular: f64) -> f64 {
    angular / TWO_PI
}

#[inline]
pub fn ns_to_us(ns: f64) -> f64 {
    ns * 1e-3
}

#[inline]
pub fn us_to_ns(us: f64) -> f64 {
    us * 1e3
}

/// Microwave power to angular Rabi strength.
///
/// Inverts `P = 10 log10(1.38e-4 * Omega_lin^2)` for the linear strength in
/// MHz and returns `2pi * Omega_lin`. Every finite power is valid.
pub fn dbm_to_rabi(power_dbm: f64) -> f64 {
    let linear = libm::sqrt(libm::pow(10.0, power_dbm / 10.0) / DBM_CALIBRATION);
    mhz_to_angular(linear)
}

/// Angular Rabi strength to microwave power; the exact inverse of
/// [`dbm_to_rabi`].
pub fn rabi_to_dbm(omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid("omega", "power conversion needs a positive Rabi strength"));
    }
    let linear = angular_to_mhz(omega);
    Ok(10.0 * libm::log10(DBM_CALIBRATION * linear * linear))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_at_figure_powers() {
        for p in [-31.0, -20.0, -4.0] {
            let back = rabi_to_dbm(dbm_to_rabi(p)).unwrap();
            assert!((back - p).abs() <= 1e-12 * p.abs(), "{p} -> {back}");
        }
    }

    #[test]
    fn calibration_point_is_one_megahertz() {
        let p = 10.0 * libm::log10(DBM_CALIBRATION);
        assert!((p + 38.6012).abs() < 1e-4);
        assert!((angular_to_mhz(dbm_to_rabi(p)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probe_at_minus_31_dbm() {
        // sqrt(10^-3.1 / 1.38e-4)
        let lin = angular_to_mhz(dbm_to_rabi(-31.0));
        assert!((lin - 2.399_166_876).abs() < 1e-8, "{lin}");
    }

    #[test]
    fn inverse_rejects_non_positive() {
        assert!(rabi_to_dbm(0.0).is_err());
        assert!(rabi_to_dbm(-1.0).is_err());
        assert!(rabi_to_dbm(f64::NAN).is_err());
    }
}
