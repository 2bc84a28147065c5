//! Event-by-event simulation of the tunneling current.
//!
//! Electrons attempt to tunnel with jittered spacings; the cage vibrates and
//! modulates the instantaneous current; each attempt is accepted with a
//! probability proportional to that current and counted into fixed windows.
//! Analytic estimates for imperfect polarization and back-action live here
//! too.

mod analytic;
mod arrivals;
mod ensemble;
mod seeding;
mod trace;
mod vibration;

pub use analytic::{mixed_spin_dispersion, spin_decay_time, SpinLifetime};
pub use arrivals::{sample_arrivals, ArrivalModel, ArrivalProcess};
pub use ensemble::{dispersion_monte_carlo, ensemble_means, mean_and_std, DispersionEstimate};
pub use seeding::{stream_rng, StreamPurpose};
pub use trace::{
    simulate_trace, simulate_trial, CurrentTrace, Estimator, MixedSpinState, Scenario, SpinSource,
};
pub use vibration::{
    averaged_current, instantaneous_current, instantaneous_rates, vibration_sensitivity, VibrationModel,
    VibrationSensitivity,
};
