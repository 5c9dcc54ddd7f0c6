//! Physical parameters and square-wave drive schedules.

use core::fmt;
use core::str::FromStr;

use crate::units::{mhz_to_angular, ns_to_us, TWO_PI};
use crate::{Error, Result};

/// Strengths, detuning and rates of the driven qutrit, all angular (rad/µs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritParams {
    /// Probe detuning.
    pub delta: f64,
    /// Probe Rabi strength.
    pub omega_p: f64,
    /// Control Rabi strength.
    pub omega_c: f64,
    /// Decay `|1> -> |0>`.
    pub gamma_10: f64,
    /// Decay `|2> -> |1>`.
    pub gamma_21: f64,
    /// Pure dephasing of `|1>`.
    pub gamma_11: f64,
    /// Pure dephasing of `|2>`.
    pub gamma_22: f64,
}

/// Measured rates in MHz: `(gamma_10, gamma_21, gamma_11, gamma_22)`.
pub const MEASURED_RATES_MHZ: (f64, f64, f64, f64) = (2.267, 4.534, 0.9165, 0.9165);

impl QutritParams {
    /// Measured rates, zero detuning and no drives.
    pub fn measured() -> Self {
        let (g10, g21, g11, g22) = MEASURED_RATES_MHZ;
        QutritParams {
            delta: 0.0,
            omega_p: 0.0,
            omega_c: 0.0,
            gamma_10: mhz_to_angular(g10),
            gamma_21: mhz_to_angular(g21),
            gamma_11: mhz_to_angular(g11),
            gamma_22: mhz_to_angular(g22),
        }
    }

    /// No dissipation, zero detuning and no drives.
    pub fn lossless() -> Self {
        QutritParams {
            delta: 0.0,
            omega_p: 0.0,
            omega_c: 0.0,
            gamma_10: 0.0,
            gamma_21: 0.0,
            gamma_11: 0.0,
            gamma_22: 0.0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_drives(mut self, omega_p: f64, omega_c: f64) -> Self {
        self.omega_p = omega_p;
        self.omega_c = omega_c;
        self
    }

    pub fn with_control(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    /// Total coherence decay `(gamma_10 + gamma_21)/2 + gamma_11 + gamma_22`.
    pub fn total_gamma(&self) -> f64 {
        0.5 * (self.gamma_10 + self.gamma_21) + self.gamma_11 + self.gamma_22
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_10 == 0.0 && self.gamma_21 == 0.0 && self.gamma_11 == 0.0 && self.gamma_22 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        let non_negative = [
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("gamma_10", self.gamma_10),
            ("gamma_21", self.gamma_21),
            ("gamma_11", self.gamma_11),
            ("gamma_22", self.gamma_22),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Both fields always on.
    Unmodulated,
    /// Both fields share one square wave.
    Simultaneous,
    /// Probe and control alternate.
    Complementary,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Unmodulated, Scheme::Simultaneous, Scheme::Complementary];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Unmodulated => "unmodulated",
            Scheme::Simultaneous => "simultaneous",
            Scheme::Complementary => "complementary",
        }
    }

    pub fn is_modulated(self) -> bool {
        self != Scheme::Unmodulated
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| Error::invalid("scheme", "expected unmodulated, simultaneous or complementary"))
    }
}

/// Instantaneous on/off state of the probe and control fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Envelope {
    pub probe: bool,
    pub control: bool,
}

impl Envelope {
    pub const BOTH: Envelope = Envelope { probe: true, control: true };
    pub const NONE: Envelope = Envelope { probe: false, control: false };
    pub const PROBE: Envelope = Envelope { probe: true, control: false };
    pub const CONTROL: Envelope = Envelope { probe: false, control: true };

    /// `(e_p, e_c)` as 0.0 / 1.0 factors.
    pub fn factors(self) -> (f64, f64) {
        (f64::from(u8::from(self.probe)), f64::from(u8::from(self.control)))
    }
}

/// A constant-envelope stretch of one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub envelope: Envelope,
}

/// Averaging window standing in for the period of an unmodulated drive, in µs.
pub const UNMODULATED_WINDOW_US: f64 = 0.05;

/// 50% duty-cycle square-wave modulation.
///
/// The first half `[0, tau/2)` of every period carries the probe (both fields
/// for the simultaneous scheme); [`DriveSchedule::shifted`] swaps the halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSchedule {
    scheme: Scheme,
    tau: f64,
    shifted: bool,
}

impl DriveSchedule {
    pub const DUTY: f64 = 0.5;

    /// `tau` in µs.
    pub fn new(scheme: Scheme, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::invalid("tau", "modulation period must be positive"));
        }
        Ok(DriveSchedule { scheme, tau, shifted: false })
    }

    pub fn from_ns(scheme: Scheme, tau_ns: f64) -> Result<Self> {
        Self::new(scheme, ns_to_us(tau_ns))
    }

    pub fn unmodulated() -> Self {
        DriveSchedule {
            scheme: Scheme::Unmodulated,
            tau: UNMODULATED_WINDOW_US,
            shifted: false,
        }
    }

    /// The same drive with its time origin moved by half a period.
    pub fn shifted(mut self) -> Self {
        self.shifted = !self.shifted;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Modulation period (µs). For the unmodulated scheme this is the
    /// averaging window.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn is_shifted(&self) -> bool {
        self.shifted
    }

    pub fn duty(&self) -> f64 {
        Self::DUTY
    }

    /// Modulation angular frequency `2pi / tau`.
    pub fn omega(&self) -> f64 {
        TWO_PI / self.tau
    }

    /// Envelope at time `t` (µs, `t >= 0`).
    pub fn envelope(&self, t: f64) -> Envelope {
        let phase = libm::fmod(t, self.tau);
        let phase = if phase < 0.0 { phase + self.tau } else { phase };
        self.envelope_of_half((phase < 0.5 * self.tau) != self.shifted)
    }

    /// Envelope of the first (`true`) or second half of the period.
    pub fn envelope_of_half(&self, first: bool) -> Envelope {
        match (self.scheme, first) {
            (Scheme::Unmodulated, _) => Envelope::BOTH,
            (Scheme::Simultaneous, true) => Envelope::BOTH,
            (Scheme::Simultaneous, false) => Envelope::NONE,
            (Scheme::Complementary, true) => Envelope::PROBE,
            (Scheme::Complementary, false) => Envelope::CONTROL,
        }
    }

    /// The two constant halves of one period, in time order.
    pub fn segments(&self) -> [Segment; 2] {
        let half = 0.5 * self.tau;
        [
            Segment {
                duration: half,
                envelope: self.envelope_of_half(!self.shifted),
            },
            Segment {
                duration: half,
                envelope: self.envelope_of_half(self.shifted),
            },
        ]
    }
}

/// `(e_p, e_c)` at time `t`.
pub fn drive_envelope(schedule: &DriveSchedule, t: f64) -> Envelope {
    schedule.envelope(t)
}
