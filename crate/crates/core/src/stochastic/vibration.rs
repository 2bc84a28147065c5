use std::f64::consts::PI;

use crate::constants::wkb_prefactor;
use crate::error::{ensure, Error, Result};
use crate::physics::rates::{displaced_step_factors, exact_exponents};
use crate::physics::{
    linearization_factors, BarrierModel, Calibration, DeviceGeometry, Mode, SpinAlignment, StepFactors,
};
use crate::quadrature::{integrate, QuadratureOptions};

/// Rigid oscillation of the cage along the tunneling axis,
/// `Δ(t) = (δ/2) cos(ωt + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationModel {
    delta_nm: f64,
    omega: f64,
    phase: f64,
}

impl VibrationModel {
    /// Peak-to-peak displacement, 3 pm.
    pub const DEFAULT_DELTA_NM: f64 = 0.003;
    pub const DEFAULT_OMEGA_RAD_S: f64 = 1e12;

    pub fn new(delta_nm: f64, omega_rad_s: f64, phase_rad: f64) -> Result<Self> {
        ensure(delta_nm.is_finite() && delta_nm >= 0.0, "delta", || {
            format!("displacement must be non-negative, got {delta_nm} nm")
        })?;
        ensure(omega_rad_s.is_finite() && omega_rad_s > 0.0, "omega", || {
            format!("angular frequency must be positive, got {omega_rad_s} rad/s")
        })?;
        ensure(phase_rad.is_finite(), "phase", || format!("must be finite, got {phase_rad}"))?;
        Ok(Self {
            delta_nm,
            omega: omega_rad_s,
            phase: phase_rad,
        })
    }

    /// No vibration at the default frequency.
    pub fn still() -> Self {
        Self {
            delta_nm: 0.0,
            ..Self::default()
        }
    }

    pub fn delta_nm(&self) -> f64 {
        self.delta_nm
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn amplitude_nm(&self) -> f64 {
        0.5 * self.delta_nm
    }

    pub fn displacement(&self, t: f64) -> f64 {
        self.amplitude_nm() * (self.omega * t + self.phase).cos()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// The multiple of `π/ω` closest to `approx_s` (at least one). Over such a
    /// window the cosine averages to zero when the phase is zero.
    pub fn cancelling_window(&self, approx_s: f64) -> f64 {
        let k = (approx_s * self.omega / PI).round().max(1.0);
        k * PI / self.omega
    }

    /// Fails if the oscillation would close the tip gap or the substrate gap.
    pub fn check_gaps(&self, geometry: &DeviceGeometry) -> Result<()> {
        let amplitude = self.amplitude_nm();
        for gap in [geometry.x1(), geometry.d3()] {
            if amplitude >= gap {
                return Err(Error::GapClosed {
                    amplitude_nm: amplitude,
                    gap_nm: gap,
                });
            }
        }
        Ok(())
    }
}

impl Default for VibrationModel {
    fn default() -> Self {
        Self {
            delta_nm: Self::DEFAULT_DELTA_NM,
            omega: Self::DEFAULT_OMEGA_RAD_S,
            phase: 0.0,
        }
    }
}

/// `-d ln T / dΔ` of the two displaced steps, in nm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationSensitivity {
    pub step1: f64,
    pub step3: f64,
}

impl VibrationSensitivity {
    pub fn total(&self) -> f64 {
        self.step1 + self.step3
    }
}

pub fn vibration_sensitivity(geometry: &DeviceGeometry, barriers: &BarrierModel) -> VibrationSensitivity {
    let p = wkb_prefactor();
    VibrationSensitivity {
        step1: p * (barriers.w1(geometry) * geometry.x1()).sqrt(),
        step3: p * (barriers.w3(geometry) * geometry.x2()).sqrt(),
    }
}

/// Step transmissions at time `t` with the cage displaced by `Δ(t)`: the tip
/// gap widens to `x1 + Δ`, the lower limit of step 3 moves to `x2 - Δ` and
/// the cage step is unchanged.
pub fn instantaneous_rates(
    t: f64,
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    vibration: &VibrationModel,
    mode: Mode,
) -> Result<StepFactors> {
    vibration.check_gaps(geometry)?;
    displaced_step_factors(
        geometry,
        barriers,
        alignment.effective_sign(),
        mode,
        vibration.displacement(t),
    )
}

/// Precomputed per-event current evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) enum CurrentKernel {
    Linearized {
        i0: f64,
        sum_d: f64,
        sensitivity: f64,
        vibration: VibrationModel,
    },
    Exact {
        geometry: DeviceGeometry,
        barriers: BarrierModel,
        calibration: Calibration,
        vibration: VibrationModel,
    },
}

impl CurrentKernel {
    pub(crate) fn new(
        geometry: &DeviceGeometry,
        barriers: &BarrierModel,
        vibration: &VibrationModel,
        calibration: &Calibration,
        mode: Mode,
    ) -> Result<Self> {
        vibration.check_gaps(geometry)?;
        Ok(match mode {
            Mode::PaperLinearized => CurrentKernel::Linearized {
                i0: calibration.baseline_current(geometry, barriers)?,
                sum_d: linearization_factors(geometry, barriers).sum(),
                sensitivity: vibration_sensitivity(geometry, barriers).total(),
                vibration: *vibration,
            },
            Mode::ExactWkb => CurrentKernel::Exact {
                geometry: *geometry,
                barriers: *barriers,
                calibration: *calibration,
                vibration: *vibration,
            },
        })
    }

    pub(crate) fn at_displacement(&self, displacement: f64, sign: f64) -> f64 {
        match self {
            // Linear in Δ; cross terms of order D·Δ are dropped.
            CurrentKernel::Linearized {
                i0,
                sum_d,
                sensitivity,
                ..
            } => i0 * (1.0 + sign * sum_d - sensitivity * displacement),
            CurrentKernel::Exact {
                geometry,
                barriers,
                calibration,
                ..
            } => {
                let e = exact_exponents(geometry, barriers, sign, displacement).expect("gap checked at construction");
                calibration.current_from_exponent(e.total())
            }
        }
    }

    pub(crate) fn vibration(&self) -> &VibrationModel {
        match self {
            CurrentKernel::Linearized { vibration, .. } | CurrentKernel::Exact { vibration, .. } => vibration,
        }
    }

    pub(crate) fn at(&self, t: f64, sign: f64) -> f64 {
        self.at_displacement(self.vibration().displacement(t), sign)
    }

    /// Largest current reachable for `sign` over a vibration cycle; both
    /// kernels are monotone in the displacement.
    pub(crate) fn peak(&self, sign: f64) -> f64 {
        let a = self.vibration().amplitude_nm();
        self.at_displacement(-a, sign).max(self.at_displacement(a, sign))
    }
}

/// Current at time `t` (pA) for one alignment.
///
/// In linearized mode this is `I0 [1 ± ΣD - s·Δ(t)]` with `s` the combined
/// vibration sensitivity of steps 1 and 3; in exact mode the calibrated
/// product of the displaced exact step factors.
pub fn instantaneous_current(
    t: f64,
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    vibration: &VibrationModel,
    calibration: &Calibration,
    mode: Mode,
) -> Result<f64> {
    let kernel = CurrentKernel::new(geometry, barriers, vibration, calibration, mode)?;
    Ok(kernel.at(t, alignment.effective_sign()))
}

/// Time average `(1/T) ∫₀ᵀ I(t) dt` of [`instantaneous_current`].
///
/// Linearized mode integrates the cosine analytically, so a window of
/// `kπ/ω` (zero phase) reproduces the static current. Exact mode integrates
/// one period numerically and adds the remainder.
pub fn averaged_current(
    window_s: f64,
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    vibration: &VibrationModel,
    calibration: &Calibration,
    mode: Mode,
) -> Result<f64> {
    ensure(window_s.is_finite() && window_s > 0.0, "window", || {
        format!("must be positive, got {window_s} s")
    })?;
    let kernel = CurrentKernel::new(geometry, barriers, vibration, calibration, mode)?;
    let sign = alignment.effective_sign();
    match kernel {
        CurrentKernel::Linearized {
            i0,
            sum_d,
            sensitivity,
            vibration,
        } => {
            let (w, phi) = (vibration.omega(), vibration.phase());
            let mean_cos = ((w * window_s + phi).sin() - phi.sin()) / (w * window_s);
            Ok(i0 * (1.0 + sign * sum_d - sensitivity * vibration.amplitude_nm() * mean_cos))
        }
        CurrentKernel::Exact { ref vibration, .. } => {
            if vibration.delta_nm() == 0.0 {
                return Ok(kernel.at_displacement(0.0, sign));
            }
            let period = vibration.period();
            let cycles = (window_s / period).floor();
            let remainder = window_s - cycles * period;
            let opts = QuadratureOptions {
                rel_tol: 1e-12,
                ..Default::default()
            };
            let f = |t: f64| kernel.at(t, sign);
            let mut total = 0.0;
            if cycles > 0.0 {
                total += cycles * integrate(f, 0.0, period, &[], opts)?.value;
            }
            if remainder > 0.0 {
                total += integrate(f, 0.0, remainder, &[], opts)?.value;
            }
            Ok(total / window_s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{calibrate_baseline, current_for, rate_step1, rate_step2, rate_step3};

    fn setup() -> (DeviceGeometry, BarrierModel, Calibration) {
        let g = DeviceGeometry::default();
        let b = BarrierModel::default();
        let c = calibrate_baseline(&g, &b, 1000.0).unwrap();
        (g, b, c)
    }

    #[test]
    fn still_cage_gives_static_rates() {
        let (g, b, _) = setup();
        let a = SpinAlignment::parallel();
        for mode in [Mode::PaperLinearized, Mode::ExactWkb] {
            let r = instantaneous_rates(3.7e-12, &g, &b, a, &VibrationModel::still(), mode).unwrap();
            assert_eq!(r.step1, rate_step1(&g, &b, a, mode).unwrap());
            assert_eq!(r.step2, rate_step2(&g, &b, a, mode).unwrap());
            assert_eq!(r.step3, rate_step3(&g, &b, a, mode).unwrap());
        }
    }

    #[test]
    fn quarter_period_has_no_displacement() {
        let (g, b, _) = setup();
        let v = VibrationModel::default();
        let t = PI / (2.0 * v.omega());
        assert!(v.displacement(t).abs() < 1e-18);
        let a = SpinAlignment::antiparallel();
        let r = instantaneous_rates(t, &g, &b, a, &v, Mode::ExactWkb).unwrap();
        let s = rate_step1(&g, &b, a, Mode::ExactWkb).unwrap();
        assert!((r.step1 / s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step1_exponent_perturbation_at_zero_time() {
        let (g, b, _) = setup();
        let b = b.with_exchange(0.0).unwrap();
        let a = SpinAlignment::parallel();
        let v = VibrationModel::default();
        let moved = instantaneous_rates(0.0, &g, &b, a, &v, Mode::PaperLinearized).unwrap();
        let still = rate_step1(&g, &b, a, Mode::PaperLinearized).unwrap();
        // exponent grows by the factor 1 + 3Δ/(2 x1), Δ = 1.5 pm
        let fraction = moved.step1.ln() / still.ln() - 1.0;
        let expected = 3.0 * 0.0015 / (2.0 * 0.23);
        assert!((fraction / expected - 1.0).abs() < 1e-12, "{fraction}");
        assert!((fraction - 9.78e-3).abs() < 0.01e-3);
        assert_eq!(moved.step2, rate_step2(&g, &b, a, Mode::PaperLinearized).unwrap());
    }

    #[test]
    fn sensitivity_matches_finite_difference_of_exact_exponent() {
        let (g, b, _) = setup();
        let b = b.with_exchange(0.0).unwrap();
        let s = vibration_sensitivity(&g, &b);
        let h = 1e-6;
        let lnt = |d: f64| displaced_step_factors(&g, &b, 1.0, Mode::ExactWkb, d).unwrap();
        let (p, m) = (lnt(h), lnt(-h));
        let fd1 = -(p.step1.ln() - m.step1.ln()) / (2.0 * h);
        let fd3 = -(p.step3.ln() - m.step3.ln()) / (2.0 * h);
        assert!((fd1 / s.step1 - 1.0).abs() < 1e-6);
        assert!((fd3 / s.step3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gap_closing_vibration_rejected() {
        let (g, b, _) = setup();
        let v = VibrationModel::new(0.5, 1e12, 0.0).unwrap();
        let err = instantaneous_rates(0.0, &g, &b, SpinAlignment::parallel(), &v, Mode::ExactWkb).unwrap_err();
        assert!(matches!(err, Error::GapClosed { .. }));
    }

    #[test]
    fn half_period_window_cancels() {
        let (g, b, c) = setup();
        let v = VibrationModel::default();
        for a in [SpinAlignment::parallel(), SpinAlignment::antiparallel()] {
            let stat = current_for(&g, &b, a, &c, Mode::PaperLinearized).unwrap();
            let avg = averaged_current(PI / v.omega(), &g, &b, a, &v, &c, Mode::PaperLinearized).unwrap();
            assert!((avg / stat - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn still_cage_average_is_static_for_any_window() {
        let (g, b, c) = setup();
        let a = SpinAlignment::parallel();
        for mode in [Mode::PaperLinearized, Mode::ExactWkb] {
            let stat = current_for(&g, &b, a, &c, mode).unwrap();
            let avg = averaged_current(1.234e-9, &g, &b, a, &VibrationModel::still(), &c, mode).unwrap();
            assert_eq!(avg, stat);
        }
    }

    #[test]
    fn exact_average_close_to_static_over_whole_periods() {
        let (g, b, c) = setup();
        let v = VibrationModel::default();
        let a = SpinAlignment::parallel();
        let stat = current_for(&g, &b, a, &c, Mode::ExactWkb).unwrap();
        let avg = averaged_current(20.0 * v.period(), &g, &b, a, &v, &c, Mode::ExactWkb).unwrap();
        // second order in the displacement: (sΔ)²/4 ≈ 6e-4
        assert!(avg > stat);
        assert!((avg / stat - 1.0) < 1e-3);
    }

    #[test]
    fn cancelling_window_is_multiple_of_half_period() {
        let v = VibrationModel::default();
        let w = v.cancelling_window(100e-9);
        let k = w * v.omega() / PI;
        assert!((k - k.round()).abs() < 1e-9);
        assert!((w - 100e-9).abs() < PI / v.omega());
        assert!((v.cancelling_window(1e-20) - PI / v.omega()).abs() < 1e-25);
    }
}
