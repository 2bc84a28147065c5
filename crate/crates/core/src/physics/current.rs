use super::rates::{baseline_exponents, exact_exponents, linearization_factors};
use super::{BarrierModel, DeviceGeometry, Mode, SpinAlignment};
use crate::error::{ensure, Error, Result};

/// Fixes the absolute current scale: `I0(geometry) = C · T1·T2·T3` at `J = 0`,
/// with `C` chosen so that `I0(reference) = i0_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    reference: DeviceGeometry,
    i0_ref_pa: f64,
    reference_exponent: f64,
}

impl Calibration {
    pub const DEFAULT_I0_REF_PA: f64 = 1000.0;

    pub fn reference(&self) -> DeviceGeometry {
        self.reference
    }

    pub fn i0_ref_pa(&self) -> f64 {
        self.i0_ref_pa
    }

    /// The multiplicative constant `C` in pA.
    pub fn constant_pa(&self) -> f64 {
        self.i0_ref_pa * self.reference_exponent.exp()
    }

    /// Current `C · exp(-exponent)`, evaluated relative to the reference so
    /// that no intermediate underflows.
    pub(crate) fn current_from_exponent(&self, exponent: f64) -> f64 {
        self.i0_ref_pa * (self.reference_exponent - exponent).exp()
    }

    /// Spin-independent current `I0` at `geometry`.
    pub fn baseline_current(&self, geometry: &DeviceGeometry, barriers: &BarrierModel) -> Result<f64> {
        Ok(self.current_from_exponent(baseline_exponents(geometry, barriers)?.total()))
    }
}

/// Calibrates `C` so that the spin-independent current at `reference` is `i0_ref_pa`.
pub fn calibrate_baseline(
    reference: &DeviceGeometry,
    barriers: &BarrierModel,
    i0_ref_pa: f64,
) -> Result<Calibration> {
    ensure(i0_ref_pa.is_finite() && i0_ref_pa > 0.0, "i0_ref", || {
        format!("reference current must be positive, got {i0_ref_pa} pA")
    })?;
    let exponent = baseline_exponents(reference, barriers)?.total();
    let product = (-exponent).exp();
    if !product.is_normal() || !exponent.exp().is_finite() {
        return Err(Error::TransmissionUnderflow(product));
    }
    Ok(Calibration {
        reference: *reference,
        i0_ref_pa,
        reference_exponent: exponent,
    })
}

/// Spin-resolved currents at one geometry, in pA.
///
/// `i_up_pa` is the current with the caged spin parallel to the tip
/// polarization (`σ_eff = +1`), `i_down_pa` antiparallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentResult {
    pub i0_pa: f64,
    pub i_up_pa: f64,
    pub i_down_pa: f64,
    /// `I₊ - I0`; in linearized mode `I0·ΣD`, so `ΔI₋ = -ΔI₊` exactly.
    pub delta_plus_pa: f64,
    pub delta_minus_pa: f64,
    pub mode: Mode,
}

impl CurrentResult {
    /// `ΔI₊ = I₊ - I0`
    pub fn delta_plus(&self) -> f64 {
        self.delta_plus_pa
    }

    /// `ΔI₋ = I₋ - I0`
    pub fn delta_minus(&self) -> f64 {
        self.delta_minus_pa
    }

    /// Spin contrast `ΔI = ΔI₊ - ΔI₋`.
    pub fn delta(&self) -> f64 {
        self.delta_plus() - self.delta_minus()
    }

    pub fn for_alignment(&self, alignment: SpinAlignment) -> f64 {
        if alignment.effective_sign() > 0.0 {
            self.i_up_pa
        } else {
            self.i_down_pa
        }
    }
}

pub(crate) fn signed_current(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    sign: f64,
    calibration: &Calibration,
    mode: Mode,
) -> Result<f64> {
    match mode {
        // Step corrections collected to first order in J: I0 (1 ± ΣD).
        Mode::PaperLinearized => {
            let i0 = calibration.baseline_current(geometry, barriers)?;
            let d = linearization_factors(geometry, barriers);
            Ok(i0 * (1.0 + sign * d.sum()))
        }
        Mode::ExactWkb => {
            let e = exact_exponents(geometry, barriers, sign, 0.0)?;
            Ok(calibration.current_from_exponent(e.total()))
        }
    }
}

/// Current for a single spin alignment.
pub fn current_for(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    calibration: &Calibration,
    mode: Mode,
) -> Result<f64> {
    signed_current(geometry, barriers, alignment.effective_sign(), calibration, mode)
}

/// Spin-independent and both spin-resolved currents.
///
/// ```
/// use fullerene_stm::physics::*;
///
/// let geometry = DeviceGeometry::default();
/// let barriers = BarrierModel::default();
/// let cal = calibrate_baseline(&geometry, &barriers, 1000.0).unwrap();
/// let r = spin_current(&geometry, &barriers, &cal, Mode::PaperLinearized).unwrap();
/// assert!((r.delta_plus() - 16.0).abs() < 1.6);
/// ```
pub fn spin_current(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    calibration: &Calibration,
    mode: Mode,
) -> Result<CurrentResult> {
    let i0 = calibration.baseline_current(geometry, barriers)?;
    let i_up = signed_current(geometry, barriers, 1.0, calibration, mode)?;
    let i_down = signed_current(geometry, barriers, -1.0, calibration, mode)?;
    let (delta_plus, delta_minus) = match mode {
        Mode::PaperLinearized => {
            let shift = i0 * linearization_factors(geometry, barriers).sum();
            (shift, -shift)
        }
        Mode::ExactWkb => (i_up - i0, i_down - i0),
    };
    Ok(CurrentResult {
        i0_pa: i0,
        i_up_pa: i_up,
        i_down_pa: i_down,
        delta_plus_pa: delta_plus,
        delta_minus_pa: delta_minus,
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d1_nm: f64,
    pub result: CurrentResult,
}

/// Evenly spaced tip heights from `d1_range.0` to `d1_range.1` inclusive.
/// The calibration is not redone per point, so `I0` falls as `d1` grows.
pub fn sweep_delta_vs_d1(
    d1_range: (f64, f64),
    steps: usize,
    template: &DeviceGeometry,
    barriers: &BarrierModel,
    calibration: &Calibration,
    mode: Mode,
) -> Result<Vec<SweepRow>> {
    let (lo, hi) = d1_range;
    ensure(lo.is_finite() && lo > 0.0, "d1_min", || format!("must be positive, got {lo} nm"))?;
    ensure(hi.is_finite() && hi > lo, "d1_max", || format!("must exceed d1_min = {lo} nm, got {hi} nm"))?;
    ensure(steps >= 2, "steps", || format!("need at least 2 grid points, got {steps}"))?;

    let step = (hi - lo) / (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let d1 = if i == steps - 1 { hi } else { lo + step * i as f64 };
            let geometry = template.with_d1(d1)?;
            Ok(SweepRow {
                d1_nm: d1,
                result: spin_current(&geometry, barriers, calibration, mode)?,
            })
        })
        .collect()
}
