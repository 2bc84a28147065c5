//! Spin-dependent STM tunneling through an endohedral fullerene qubit.
//!
//! * [`physics`]: deterministic WKB transmission of the tip / cage / substrate
//!   stack, current calibration and tip-height sweeps.
//! * [`stochastic`]: time-domain Monte Carlo of individual tunneling events
//!   with cage vibration, arrival jitter and imperfect spin polarization.
//! * [`readout`]: threshold classification of simulated traces and readout
//!   fidelity.

pub mod constants;
pub mod error;
pub mod physics;
pub mod quadrature;
pub mod readout;
pub mod stochastic;

pub use error::{Error, Result};

/// Guide chapters, compiled so their examples stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tunneling.md")]
    mod tunneling {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    mod calibration {}
    #[doc = include_str!("../../../book/src/vibration.md")]
    mod vibration {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/readout.md")]
    mod readout {}
}
