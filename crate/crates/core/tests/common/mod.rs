//! Independent reference evaluations in SI units.
#![allow(dead_code)]

pub const M_E: f64 = 9.109_383_701_5e-31;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const Q_E: f64 = 1.602_176_634e-19;
pub const NM: f64 = 1e-9;

/// Adaptive Simpson with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫ sqrt(8 m max(W x + s, 0)) / ħ dx` with W in eV/nm, limits in nm and the
/// shift in eV, integrated in SI units.
pub fn wkb_exponent_si(w_ev_nm: f64, a_nm: f64, b_nm: f64, shift_ev: f64) -> f64 {
    let w = w_ev_nm * Q_E / NM;
    let s = shift_ev * Q_E;
    let integrand = |x: f64| (8.0 * M_E * (w * x + s).max(0.0)).sqrt() / HBAR;
    let (a, b) = (a_nm * NM, b_nm * NM);
    let turning = -s / w;
    let lo = if turning > a { turning.min(b) } else { a };
    if lo >= b {
        return 0.0;
    }
    let scale = integrand(b) * (b - lo);
    simpson(&integrand, lo, b, 1e-15 * scale)
}

/// `J sqrt(8 m x / (W ħ²))` with J in eV, x in nm, W in eV/nm.
pub fn d_linear_si(j_ev: f64, x_nm: f64, w_ev_nm: f64) -> f64 {
    let j = j_ev * Q_E;
    let w = w_ev_nm * Q_E / NM;
    j * (8.0 * M_E * x_nm * NM / (w * HBAR * HBAR)).sqrt()
}

/// `sqrt(2m) J d / (sqrt(Φ) ħ)`.
pub fn d_constant_si(j_ev: f64, d_nm: f64, phi_ev: f64) -> f64 {
    (2.0 * M_E).sqrt() * j_ev * Q_E * d_nm * NM / ((phi_ev * Q_E).sqrt() * HBAR)
}

pub fn kappa_si(e_ev: f64) -> f64 {
    (2.0 * M_E * e_ev * Q_E).sqrt() / HBAR * NM
}
