//! Deterministic spin-dependent tunneling through a tip / fullerene / substrate
//! stack.
//!
//! The tunneling path is split into three steps: a linearly rising barrier
//! between tip and cage, a constant barrier across the cage, and a second
//! linear barrier between cage and substrate. Exchange coupling with the caged
//! spin shifts every barrier by `∓J` depending on the relative alignment of
//! the tunneling electron and the caged spin.

pub(crate) mod current;
pub(crate) mod rates;
mod wkb;

pub use current::{
    calibrate_baseline, current_for, spin_current, sweep_delta_vs_d1, Calibration, CurrentResult,
    SweepRow,
};
pub use rates::{
    baseline_exponents, linearization_factors, rate_step1, rate_step2, rate_step3,
    rate_step3_sign_corrected, step_factors, BaselineExponents, LinearizationFactors, StepFactors,
};
pub use wkb::{
    wkb_linear_barrier_exponent, wkb_linear_barrier_exponent_checked,
    wkb_linear_barrier_exponent_quadrature, WkbExponent, ROUTE_AGREEMENT,
};

use std::fmt;

use crate::error::{ensure, Error, Result};

/// Gap widths along the tunneling axis, in nm.
///
/// `d1` is the tip–cage gap, `d2` the cage diameter and `d3` the
/// cage–substrate (van der Waals) gap. Absolute coordinates are measured
/// from the tip: `x1 = d1`, `x2 = d1 + d2`, `x3 = d1 + d2 + d3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceGeometry {
    d1: f64,
    d2: f64,
    d3: f64,
}

impl DeviceGeometry {
    pub const DEFAULT_D1_NM: f64 = 0.23;
    pub const DEFAULT_D2_NM: f64 = 0.7;
    pub const DEFAULT_D3_NM: f64 = 0.27;

    pub fn new(d1_nm: f64, d2_nm: f64, d3_nm: f64) -> Result<Self> {
        for (name, v) in [("d1", d1_nm), ("d2", d2_nm), ("d3", d3_nm)] {
            ensure(v.is_finite() && v > 0.0, name, || format!("gap must be positive, got {v} nm"))?;
        }
        Ok(Self {
            d1: d1_nm,
            d2: d2_nm,
            d3: d3_nm,
        })
    }

    /// Same cage and substrate gap, different tip height.
    pub fn with_d1(&self, d1_nm: f64) -> Result<Self> {
        Self::new(d1_nm, self.d2, self.d3)
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }
    pub fn d2(&self) -> f64 {
        self.d2
    }
    pub fn d3(&self) -> f64 {
        self.d3
    }
    pub fn x1(&self) -> f64 {
        self.d1
    }
    pub fn x2(&self) -> f64 {
        self.d1 + self.d2
    }
    pub fn x3(&self) -> f64 {
        self.d1 + self.d2 + self.d3
    }
}

impl Default for DeviceGeometry {
    fn default() -> Self {
        Self {
            d1: Self::DEFAULT_D1_NM,
            d2: Self::DEFAULT_D2_NM,
            d3: Self::DEFAULT_D3_NM,
        }
    }
}

/// Which Zeeman pair of the `S = 3/2` dopant encodes the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpinManifold {
    /// `|±1/2⟩`
    #[default]
    Half,
    /// `|±3/2⟩`, which triples the effective exchange shift.
    ThreeHalves,
}

impl SpinManifold {
    pub fn multiplier(self) -> f64 {
        match self {
            SpinManifold::Half => 1.0,
            SpinManifold::ThreeHalves => 3.0,
        }
    }
}

/// Barrier heights (eV) and the exchange strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierModel {
    phi1: f64,
    phi2: f64,
    phi3: f64,
    exchange: f64,
    manifold: SpinManifold,
}

impl BarrierModel {
    pub const DEFAULT_PHI1_EV: f64 = 2.0;
    pub const DEFAULT_PHI2_EV: f64 = 1.0;
    pub const DEFAULT_PHI3_EV: f64 = 1.0;
    pub const DEFAULT_EXCHANGE_EV: f64 = 1e-3;

    pub fn new(
        phi1_ev: f64,
        phi2_ev: f64,
        phi3_ev: f64,
        exchange_ev: f64,
        manifold: SpinManifold,
    ) -> Result<Self> {
        for (name, v) in [("phi1", phi1_ev), ("phi2", phi2_ev), ("phi3", phi3_ev)] {
            ensure(v.is_finite() && v > 0.0, name, || {
                format!("barrier height must be positive, got {v} eV")
            })?;
        }
        ensure(exchange_ev.is_finite() && exchange_ev >= 0.0, "exchange", || {
            format!("exchange strength must be non-negative, got {exchange_ev} eV")
        })?;
        let model = Self {
            phi1: phi1_ev,
            phi2: phi2_ev,
            phi3: phi3_ev,
            exchange: exchange_ev,
            manifold,
        };
        let j = model.effective_exchange();
        for (barrier, phi) in [("phi1", phi1_ev), ("phi2", phi2_ev), ("phi3", phi3_ev)] {
            if j >= phi {
                return Err(Error::NonPerturbative {
                    barrier,
                    exchange_ev: j,
                    barrier_ev: phi,
                });
            }
        }
        Ok(model)
    }

    pub fn with_exchange(&self, exchange_ev: f64) -> Result<Self> {
        Self::new(self.phi1, self.phi2, self.phi3, exchange_ev, self.manifold)
    }

    pub fn with_manifold(&self, manifold: SpinManifold) -> Result<Self> {
        Self::new(self.phi1, self.phi2, self.phi3, self.exchange, manifold)
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }
    pub fn phi2(&self) -> f64 {
        self.phi2
    }
    pub fn phi3(&self) -> f64 {
        self.phi3
    }
    /// Bare exchange strength `J`, eV.
    pub fn exchange(&self) -> f64 {
        self.exchange
    }
    pub fn manifold(&self) -> SpinManifold {
        self.manifold
    }

    /// `J` scaled by the spin-manifold multiplier.
    pub fn effective_exchange(&self) -> f64 {
        self.exchange * self.manifold.multiplier()
    }

    /// Slope of the tip–cage barrier, `W1 = Φ1 / d1` (eV/nm).
    pub fn w1(&self, geometry: &DeviceGeometry) -> f64 {
        self.phi1 / geometry.d1()
    }

    /// Slope of the cage–substrate barrier, `W3 = Φ3 / d3` (eV/nm).
    pub fn w3(&self, geometry: &DeviceGeometry) -> f64 {
        self.phi3 / geometry.d3()
    }
}

impl Default for BarrierModel {
    fn default() -> Self {
        Self {
            phi1: Self::DEFAULT_PHI1_EV,
            phi2: Self::DEFAULT_PHI2_EV,
            phi3: Self::DEFAULT_PHI3_EV,
            exchange: Self::DEFAULT_EXCHANGE_EV,
            manifold: SpinManifold::Half,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Spin {
    #[default]
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Tip polarization and caged-spin orientation. Only their product matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpinAlignment {
    pub tip: Spin,
    pub caged: Spin,
}

impl SpinAlignment {
    pub fn new(tip: Spin, caged: Spin) -> Self {
        Self { tip, caged }
    }

    /// Up-polarized tip, caged spin up.
    pub fn parallel() -> Self {
        Self::new(Spin::Up, Spin::Up)
    }

    /// Up-polarized tip, caged spin down.
    pub fn antiparallel() -> Self {
        Self::new(Spin::Up, Spin::Down)
    }

    /// `σ_eff = tip · caged`; +1 lowers every barrier by `J`.
    pub fn effective_sign(&self) -> f64 {
        self.tip.sign() * self.caged.sign()
    }

    pub fn flipped(&self) -> Self {
        Self::new(self.tip.flipped(), self.caged.flipped())
    }
}

/// How the exchange shift enters the transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// First-order `(1 ± D)` corrections on top of the `J = 0` WKB factors.
    #[default]
    PaperLinearized,
    /// Full WKB exponents with the barriers shifted by `∓J`.
    ExactWkb,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::PaperLinearized => "paper-linearized",
            Mode::ExactWkb => "exact-wkb",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_coordinates() {
        let g = DeviceGeometry::default();
        assert_eq!(g.x1(), 0.23);
        assert!((g.x2() - 0.93).abs() < 1e-15);
        assert!((g.x3() - 1.2).abs() < 1e-15);
        assert!(g.x1() < g.x2() && g.x2() < g.x3());
    }

    #[test]
    fn geometry_rejects_nonpositive_gaps() {
        assert!(DeviceGeometry::new(0.0, 0.7, 0.27).is_err());
        assert!(DeviceGeometry::new(0.23, -0.7, 0.27).is_err());
        assert!(DeviceGeometry::new(0.23, 0.7, f64::NAN).is_err());
    }

    #[test]
    fn barrier_slopes() {
        let g = DeviceGeometry::default();
        let b = BarrierModel::default();
        assert!((b.w1(&g) - 2.0 / 0.23).abs() < 1e-12);
        assert!((b.w3(&g) - 1.0 / 0.27).abs() < 1e-12);
    }

    #[test]
    fn exchange_must_stay_perturbative() {
        let err = BarrierModel::new(2.0, 1.0, 1.0, 0.4, SpinManifold::ThreeHalves).unwrap_err();
        assert!(matches!(err, Error::NonPerturbative { barrier: "phi2", .. }));
        assert!(BarrierModel::new(2.0, 1.0, 1.0, 0.4, SpinManifold::Half).is_ok());
        assert!(BarrierModel::new(2.0, 1.0, 1.0, -1e-3, SpinManifold::Half).is_err());
    }

    #[test]
    fn effective_sign_only_depends_on_relative_alignment() {
        let a = SpinAlignment::parallel();
        assert_eq!(a.effective_sign(), 1.0);
        assert_eq!(a.flipped().effective_sign(), 1.0);
        assert_eq!(SpinAlignment::antiparallel().effective_sign(), -1.0);
        assert_eq!(SpinAlignment::new(Spin::Down, Spin::Up).effective_sign(), -1.0);
    }
}
