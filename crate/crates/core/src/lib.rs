//! Spectra of a square-wave modulated three-level system (qutrit).
//!
//! A probe field couples `|0>` to `|1>` and a control field couples `|1>` to
//! `|2>`. Both may be switched on and off by 50% square waves, either together
//! (simultaneous modulation) or in antiphase (complementary modulation). The
//! crate computes the steady excited-state population `rho_11 + rho_22` through
//! four independent routes:
//!
//! * [`lindblad`]: the master equation integrated with fixed-step RK4,
//! * [`grating`]: closed-form diffraction/interference products,
//! * [`floquet`]: diagonalization of the truncated Floquet matrix,
//! * [`gvv`]: the Van Vleck effective model, a ladder of Lorentzians under a
//!   Bessel-sum envelope.
//!
//! [`sweep`] evaluates any backend over a detuning/control grid and provides
//! the peak finding, Lorentzian fitting and grid comparison used to check the
//! backends against each other. [`coherent`] holds the dissipationless
//! propagator used as an independent reference.
//!
//! Internally every frequency is angular, in rad/µs, and every time is in µs.
//! [`units`] converts from the linear MHz / ns / dBm values used at the edges.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bessel;
pub mod coherent;
mod error;
pub mod floquet;
pub mod grating;
pub mod gvv;
pub mod linalg;
pub mod lindblad;
pub mod params;
pub mod phases;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use params::{DriveSchedule, Envelope, QutritParams, Scheme};
pub use phases::PhaseTriple;
