use crate::error::{ensure, Result};
use crate::physics::LinearizationFactors;

/// Relative current dispersion `sqrt(⟨ΔI²⟩)/I0 ≈ (2·min(F,G)/√N) ΣDᵢ` of an
/// imperfectly polarized caged spin observed over `n_events` electrons.
pub fn mixed_spin_dispersion(f: f64, g: f64, n_events: u64, factors: &LinearizationFactors) -> Result<f64> {
    ensure(n_events >= 1, "N", || "need at least one tunneling event".to_string())?;
    ensure(f >= 0.0 && g >= 0.0, "amplitudes", || format!("must be non-negative, got F = {f}, G = {g}"))?;
    Ok(2.0 * f.min(g) / (n_events as f64).sqrt() * factors.sum())
}

/// Lifetime of the caged spin under the tunneling current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinLifetime {
    /// `τs` in seconds.
    Finite(f64),
    /// `ΣD = 0`: the current exerts no back-action.
    NoBackAction,
}

impl SpinLifetime {
    pub fn seconds(&self) -> f64 {
        match self {
            SpinLifetime::Finite(t) => *t,
            SpinLifetime::NoBackAction => f64::INFINITY,
        }
    }
}

/// Golden-rule decay `1/τs = |ΣDᵢ|² / τe`, with `τe` the mean time between
/// tunneling electrons.
pub fn spin_decay_time(factors: &LinearizationFactors, tau_e_s: f64) -> Result<SpinLifetime> {
    ensure(tau_e_s.is_finite() && tau_e_s > 0.0, "tau_e", || {
        format!("must be positive, got {tau_e_s} s")
    })?;
    let sum = factors.sum();
    if sum == 0.0 {
        return Ok(SpinLifetime::NoBackAction);
    }
    Ok(SpinLifetime::Finite(tau_e_s / (sum * sum)))
}
