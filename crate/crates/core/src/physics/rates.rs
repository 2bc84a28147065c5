use super::wkb::wkb_linear_barrier_exponent;
use super::{BarrierModel, DeviceGeometry, Mode, SpinAlignment};
use crate::constants::wkb_prefactor;
use crate::error::Result;

/// First-order exchange corrections of the three steps.
///
/// `d1` belongs to the tip–cage step, `d2`/`d3` to the upper/lower limit of
/// the cage–substrate step and `d4` to the constant barrier across the cage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationFactors {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl LinearizationFactors {
    pub fn sum(&self) -> f64 {
        self.d1 + self.d2 + self.d3 + self.d4
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.d1, self.d2, self.d3, self.d4]
    }
}

/// D-factors at the effective exchange of `barriers` (manifold multiplier
/// included).
pub fn linearization_factors(geometry: &DeviceGeometry, barriers: &BarrierModel) -> LinearizationFactors {
    let p = wkb_prefactor();
    let j = barriers.effective_exchange();
    let w1 = barriers.w1(geometry);
    let w3 = barriers.w3(geometry);
    LinearizationFactors {
        d1: j * p * (geometry.x1() / w1).sqrt(),
        d2: j * p * (geometry.x3() / w3).sqrt(),
        d3: j * p * (geometry.x2() / w3).sqrt(),
        d4: 0.5 * p * j * geometry.d2() / barriers.phi2().sqrt(),
    }
}

/// WKB exponents of the three steps with the exchange switched off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineExponents {
    pub step1: f64,
    pub step2: f64,
    pub step3: f64,
}

impl BaselineExponents {
    pub fn total(&self) -> f64 {
        self.step1 + self.step2 + self.step3
    }
}

pub fn baseline_exponents(geometry: &DeviceGeometry, barriers: &BarrierModel) -> Result<BaselineExponents> {
    displaced_baseline(geometry, barriers, 0.0)
}

/// Baseline exponents with the cage displaced by `displacement` (nm): the
/// tip gap becomes `x1 + Δ` and the lower limit of step 3 moves to `x2 - Δ`.
pub(crate) fn displaced_baseline(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    displacement: f64,
) -> Result<BaselineExponents> {
    Ok(BaselineExponents {
        step1: wkb_linear_barrier_exponent(barriers.w1(geometry), 0.0, geometry.x1() + displacement, 0.0)?,
        step2: constant_barrier_exponent(geometry.d2(), barriers.phi2()),
        step3: wkb_linear_barrier_exponent(
            barriers.w3(geometry),
            geometry.x2() - displacement,
            geometry.x3(),
            0.0,
        )?,
    })
}

/// Baseline exponents with the displacement entering at first order:
/// `x1^{3/2} → x1^{3/2}(1 + 3Δ/2x1)` and `x2^{3/2} → x2^{3/2}(1 - 3Δ/2x2)`.
fn linearized_displaced_baseline(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    displacement: f64,
) -> Result<BaselineExponents> {
    let base = baseline_exponents(geometry, barriers)?;
    if displacement == 0.0 {
        return Ok(base);
    }
    let p = wkb_prefactor();
    let (x1, x2) = (geometry.x1(), geometry.x2());
    let inner = 2.0 / 3.0 * p * barriers.w3(geometry).sqrt() * x2.powf(1.5);
    Ok(BaselineExponents {
        step1: base.step1 * (1.0 + 1.5 * displacement / x1),
        step2: base.step2,
        step3: base.step3 + inner * 1.5 * displacement / x2,
    })
}

fn constant_barrier_exponent(width: f64, height: f64) -> f64 {
    wkb_prefactor() * width * height.sqrt()
}

/// Transmission factors of the three steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFactors {
    pub step1: f64,
    pub step2: f64,
    pub step3: f64,
}

impl StepFactors {
    pub fn product(&self) -> f64 {
        self.step1 * self.step2 * self.step3
    }

    /// `-ln` of the product, summed per step to avoid underflow.
    pub fn total_exponent(&self) -> f64 {
        -(self.step1.ln() + self.step2.ln() + self.step3.ln())
    }
}

pub fn step_factors(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    mode: Mode,
) -> Result<StepFactors> {
    displaced_step_factors(geometry, barriers, alignment.effective_sign(), mode, 0.0)
}

/// Exact-mode exponents with every barrier shifted by `-sign·J` and the cage
/// displaced by `displacement`. Summing these, rather than taking logs of the
/// factors, keeps `J = 0` bit-identical to the baseline.
pub(crate) fn exact_exponents(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    sign: f64,
    displacement: f64,
) -> Result<BaselineExponents> {
    // Aligned spins (sign = +1) lower every barrier by J.
    let shift = -sign * barriers.effective_exchange();
    Ok(BaselineExponents {
        step1: wkb_linear_barrier_exponent(barriers.w1(geometry), 0.0, geometry.x1() + displacement, shift)?,
        step2: constant_barrier_exponent(geometry.d2(), barriers.phi2() + shift),
        step3: wkb_linear_barrier_exponent(barriers.w3(geometry), geometry.x2() - displacement, geometry.x3(), shift)?,
    })
}

pub(crate) fn displaced_step_factors(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    sign: f64,
    mode: Mode,
    displacement: f64,
) -> Result<StepFactors> {
    match mode {
        Mode::ExactWkb => {
            let e = exact_exponents(geometry, barriers, sign, displacement)?;
            Ok(StepFactors {
                step1: (-e.step1).exp(),
                step2: (-e.step2).exp(),
                step3: (-e.step3).exp(),
            })
        }
        Mode::PaperLinearized => {
            let base = linearized_displaced_baseline(geometry, barriers, displacement)?;
            let d = linearization_factors(geometry, barriers);
            Ok(StepFactors {
                step1: (-base.step1).exp() * (1.0 + sign * d.d1),
                step2: (-base.step2).exp() * (1.0 + sign * d.d4),
                step3: (-base.step3).exp() * (1.0 + sign * d.d2) * (1.0 + sign * d.d3),
            })
        }
    }
}

/// Tip → cage transmission.
pub fn rate_step1(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    mode: Mode,
) -> Result<f64> {
    Ok(step_factors(geometry, barriers, alignment, mode)?.step1)
}

/// Transmission across the cage (constant barrier).
pub fn rate_step2(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    mode: Mode,
) -> Result<f64> {
    Ok(step_factors(geometry, barriers, alignment, mode)?.step2)
}

/// Cage → substrate transmission.
///
/// In linearized mode both corrections carry the same sign, `(1 ± D2)(1 ± D3)`.
/// The first-order expansion of the exact exponent has opposite signs on the
/// two limits; see [`rate_step3_sign_corrected`].
pub fn rate_step3(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
    mode: Mode,
) -> Result<f64> {
    Ok(step_factors(geometry, barriers, alignment, mode)?.step3)
}

/// Linearized step 3 with the sign pattern `(1 ± D2)(1 ∓ D3)` that matches the
/// expansion of the exact exponent.
pub fn rate_step3_sign_corrected(
    geometry: &DeviceGeometry,
    barriers: &BarrierModel,
    alignment: SpinAlignment,
) -> Result<f64> {
    let sign = alignment.effective_sign();
    let base = baseline_exponents(geometry, barriers)?;
    let d = linearization_factors(geometry, barriers);
    Ok((-base.step3).exp() * (1.0 + sign * d.d2) * (1.0 - sign * d.d3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::SpinManifold;

    fn defaults() -> (DeviceGeometry, BarrierModel) {
        (DeviceGeometry::default(), BarrierModel::default())
    }

    #[test]
    fn default_d_factors() {
        let (g, b) = defaults();
        let d = linearization_factors(&g, &b);
        assert!((d.d1 - 1.67e-3).abs() < 0.01e-3, "{d:?}");
        assert!((d.d2 - 5.83e-3).abs() < 0.01e-3, "{d:?}");
        assert!((d.d3 - 5.13e-3).abs() < 0.01e-3, "{d:?}");
        assert!((d.d4 - 3.59e-3).abs() < 0.01e-3, "{d:?}");
        assert!((d.sum() - 1.62e-2).abs() < 0.01e-2);
    }

    #[test]
    fn zero_exchange_modes_coincide() {
        let (g, b) = defaults();
        let b = b.with_exchange(0.0).unwrap();
        for a in [SpinAlignment::parallel(), SpinAlignment::antiparallel()] {
            let lin = step_factors(&g, &b, a, Mode::PaperLinearized).unwrap();
            let exact = step_factors(&g, &b, a, Mode::ExactWkb).unwrap();
            assert_eq!(lin, exact);
        }
    }

    #[test]
    fn linearized_step1_correction_is_linear_in_j() {
        let (g, b) = defaults();
        let a = SpinAlignment::parallel();
        let base = (-baseline_exponents(&g, &b).unwrap().step1).exp();
        let full = rate_step1(&g, &b, a, Mode::PaperLinearized).unwrap() / base - 1.0;
        let half_b = b.with_exchange(0.5e-3).unwrap();
        let half = rate_step1(&g, &half_b, a, Mode::PaperLinearized).unwrap() / base - 1.0;
        assert!((full - 2.0 * half).abs() < 1e-15);
    }

    #[test]
    fn step2_pure_constant_barrier_at_zero_exchange() {
        let (g, b) = defaults();
        let b = b.with_exchange(0.0).unwrap();
        let t2 = rate_step2(&g, &b, SpinAlignment::parallel(), Mode::ExactWkb).unwrap();
        let expected = (-crate::constants::kappa(1.0) * 2.0 * 0.7).exp();
        assert!((t2 / expected - 1.0).abs() < 1e-13);
    }

    #[test]
    fn step2_exact_ratio_is_about_exp_two_d4() {
        let (g, b) = defaults();
        let up = rate_step2(&g, &b, SpinAlignment::parallel(), Mode::ExactWkb).unwrap();
        let down = rate_step2(&g, &b, SpinAlignment::antiparallel(), Mode::ExactWkb).unwrap();
        let d4 = linearization_factors(&g, &b).d4;
        assert!(((up / down).ln() / (2.0 * d4) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn step3_exact_correction_has_opposite_interior_signs() {
        let (g, b) = defaults();
        let base = baseline_exponents(&g, &b).unwrap().step3;
        let t3 = rate_step3(&g, &b, SpinAlignment::parallel(), Mode::ExactWkb).unwrap();
        let d = linearization_factors(&g, &b);
        let correction = t3.ln() + base;
        assert!((correction - (d.d2 - d.d3)).abs() < 1e-6);
        assert!((correction - 0.7e-3).abs() < 0.05e-3);
    }

    #[test]
    fn three_halves_manifold_triples_d_factors() {
        let (g, b) = defaults();
        let d1 = linearization_factors(&g, &b);
        let d3 = linearization_factors(&g, &b.with_manifold(SpinManifold::ThreeHalves).unwrap());
        for (x, y) in d1.as_array().iter().zip(d3.as_array()) {
            assert!((y / x - 3.0).abs() < 1e-14);
        }
    }
}
