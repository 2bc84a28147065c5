use crate::constants::wkb_prefactor;
use crate::error::{ensure, Error, Result};
use crate::quadrature::{integrate, QuadratureEstimate, QuadratureOptions};

/// Largest relative disagreement tolerated between the closed form and the
/// quadrature route.
pub const ROUTE_AGREEMENT: f64 = 1e-10;

fn validate(w: f64, a: f64, b: f64, shift: f64) -> Result<()> {
    ensure(w.is_finite() && w > 0.0, "slope", || format!("slope must be positive, got {w} eV/nm"))?;
    ensure(a.is_finite() && a >= 0.0, "lower limit", || format!("must be non-negative, got {a} nm"))?;
    ensure(b.is_finite() && b > a, "upper limit", || format!("must exceed {a} nm, got {b} nm"))?;
    ensure(shift.is_finite(), "shift", || format!("must be finite, got {shift}"))
}

/// WKB exponent `sqrt(8m/ħ²) ∫ₐᵇ sqrt(max(W·x + shift, 0)) dx` of a linear
/// barrier, dimensionless. `w` in eV/nm, limits in nm, `shift` in eV.
///
/// Where the shifted barrier dips below zero the integrand is clamped, so the
/// integral starts at the turning point `-shift / w`.
pub fn wkb_linear_barrier_exponent(w: f64, a: f64, b: f64, shift: f64) -> Result<f64> {
    validate(w, a, b, shift)?;
    let turning = -shift / w;
    if b <= turning {
        return Ok(0.0);
    }
    let lo = a.max(turning);
    let upper = w * b + shift;
    let lower = if lo == turning { 0.0 } else { (w * lo + shift).max(0.0) };
    // u^{3/2} - v^{3/2} = (u - v)(u + sqrt(uv) + v) / (sqrt(u) + sqrt(v)),
    // with u - v = w (b - lo) taken directly to avoid cancellation.
    let (su, sv) = (upper.sqrt(), lower.sqrt());
    let diff = w * (b - lo) * (upper + su * sv + lower) / (su + sv);
    Ok(wkb_prefactor() * 2.0 / (3.0 * w) * diff)
}

/// Same exponent by adaptive Gauss–Kronrod quadrature, split at the turning
/// point. The returned error estimate is already scaled by the prefactor.
pub fn wkb_linear_barrier_exponent_quadrature(
    w: f64,
    a: f64,
    b: f64,
    shift: f64,
    opts: QuadratureOptions,
) -> Result<QuadratureEstimate> {
    validate(w, a, b, shift)?;
    let turning = -shift / w;
    let est = integrate(|x| (w * x + shift).max(0.0).sqrt(), a, b, &[turning], opts)?;
    let p = wkb_prefactor();
    Ok(QuadratureEstimate {
        value: p * est.value,
        error: p * est.error,
        intervals: est.intervals,
    })
}

/// Both routes of [`wkb_linear_barrier_exponent`] side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbExponent {
    pub closed_form: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
    pub relative_difference: f64,
}

/// Evaluates the exponent by closed form and by quadrature and fails with
/// [`Error::RouteMismatch`] if they differ by more than [`ROUTE_AGREEMENT`].
pub fn wkb_linear_barrier_exponent_checked(w: f64, a: f64, b: f64, shift: f64) -> Result<WkbExponent> {
    let closed_form = wkb_linear_barrier_exponent(w, a, b, shift)?;
    let quad = wkb_linear_barrier_exponent_quadrature(w, a, b, shift, QuadratureOptions::default())?;
    let scale = closed_form.abs().max(quad.value.abs());
    let relative_difference = if scale == 0.0 {
        0.0
    } else {
        (closed_form - quad.value).abs() / scale
    };
    if relative_difference > ROUTE_AGREEMENT {
        return Err(Error::RouteMismatch {
            closed_form,
            quadrature: quad.value,
            relative: relative_difference,
        });
    }
    Ok(WkbExponent {
        closed_form,
        quadrature: quad.value,
        quadrature_error: quad.error,
        relative_difference,
    })
}
