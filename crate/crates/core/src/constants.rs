//! Physical constants and the internal unit system.
//!
//! Internally lengths are in nm, energies in eV, times in s and currents in
//! pA. CODATA 2018 exact/recommended values.

/// Electron rest mass, kg.
pub const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;

/// Reduced Planck constant, J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Reduced Planck constant, eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Elementary charge, C (also J per eV).
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;

/// Elementary charge expressed in pA·s.
pub const ELEMENTARY_CHARGE_PA_S: f64 = ELEMENTARY_CHARGE_C * 1e12;

const METERS_PER_NM: f64 = 1e-9;

/// Decay constant `sqrt(2 m E) / ħ` of a barrier of height `energy_ev`, in nm⁻¹.
///
/// ```
/// let k = fullerene_stm::constants::kappa(1.0);
/// assert!((k - 5.123).abs() < 1e-3);
/// ```
pub fn kappa(energy_ev: f64) -> f64 {
    (2.0 * ELECTRON_MASS_KG * ELEMENTARY_CHARGE_C * energy_ev).sqrt() / HBAR_J_S * METERS_PER_NM
}

/// The WKB prefactor `sqrt(8m/ħ²)` in nm⁻¹·eV^(-1/2), equal to `2·kappa(1 eV)`.
pub fn wkb_prefactor() -> f64 {
    2.0 * kappa(1.0)
}
