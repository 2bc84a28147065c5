//! Spin decisions from simulated current records and readout quality.

mod classify;
mod fidelity;
mod sweep;

pub use classify::{classify, ReadoutDecision, DEFAULT_RESOLUTION_PA};
pub use fidelity::{fidelity_curve, wilson_interval, ClassTally, FidelityReport, ReadoutSettings};
pub use sweep::{
    counting_noise_std, distinguishability_sweep, DetectabilityCriterion, DistinguishabilityRow, NoiseModel,
};
