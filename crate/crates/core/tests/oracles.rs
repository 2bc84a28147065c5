mod common;

use common::*;
use fullerene_stm::physics::{
    baseline_exponents, calibrate_baseline, linearization_factors, rate_step2, rate_step3, spin_current,
    wkb_linear_barrier_exponent, BarrierModel, DeviceGeometry, Mode, SpinAlignment,
};
use fullerene_stm::stochastic::{
    averaged_current, instantaneous_current, instantaneous_rates, mixed_spin_dispersion, VibrationModel,
};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn unit_barrier_exponent() {
    let oracle = wkb_exponent_si(1.0, 0.0, 1.0, 0.0);
    assert!((oracle - 6.831).abs() < 1e-3, "{oracle}");
    assert!(rel(oracle, 4.0 / 3.0 * kappa_si(1.0)) < 1e-10);
    let lib = wkb_linear_barrier_exponent(1.0, 0.0, 1.0, 0.0).unwrap();
    assert!(rel(lib, oracle) < 1e-10, "{lib} vs {oracle}");
}

#[test]
fn submerged_barrier_has_zero_exponent() {
    assert_eq!(wkb_exponent_si(1.0, 0.0, 1.0, -2.0), 0.0);
    assert_eq!(wkb_linear_barrier_exponent(1.0, 0.0, 1.0, -2.0).unwrap(), 0.0);
}

#[test]
fn library_matches_oracle_with_turning_point() {
    for &(w, a, b, s) in &[(8.7, 0.0, 0.23, -0.001), (3.7, 0.93, 1.2, 0.001), (2.0, 0.1, 0.9, -0.5), (0.5, 0.0, 2.0, 0.3)] {
        let oracle = wkb_exponent_si(w, a, b, s);
        let lib = wkb_linear_barrier_exponent(w, a, b, s).unwrap();
        assert!(rel(lib, oracle) < 1e-10, "({w},{a},{b},{s}): {lib} vs {oracle}");
    }
}

#[test]
fn step1_exponent_split_is_twice_d1() {
    let w1 = 2.0 / 0.23;
    let split = wkb_exponent_si(w1, 0.0, 0.23, 0.001) - wkb_exponent_si(w1, 0.0, 0.23, -0.001);
    let d1 = d_linear_si(0.001, 0.23, w1);
    assert!((d1 - 1.667e-3).abs() < 1e-6, "{d1}");
    assert!((split - 3.33e-3).abs() < 0.03e-3, "{split}");
    // The J^{3/2} endpoint term accounts for the rest.
    assert!(rel(split, 2.0 * d1) < 0.01);
}

#[test]
fn d_factors_match_direct_evaluation() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let d = linearization_factors(&g, &b);
    let w3 = 1.0 / 0.27;
    let oracle = [
        d_linear_si(1e-3, 0.23, 2.0 / 0.23),
        d_linear_si(1e-3, 1.2, w3),
        d_linear_si(1e-3, 0.93, w3),
        d_constant_si(1e-3, 0.7, 1.0),
    ];
    for (lib, o) in d.as_array().iter().zip(oracle) {
        assert!(rel(*lib, o) < 1e-9, "{lib} vs {o}");
    }
    assert!((oracle[1] - 5.83e-3).abs() < 0.01e-3);
    assert!((oracle[2] - 5.13e-3).abs() < 0.01e-3);
    assert!((oracle[3] - 3.59e-3).abs() < 0.01e-3);
    assert!(rel(oracle[3], kappa_si(1.0) * 0.7 * 1e-3 / 1.0) < 1e-12);
    let sum: f64 = oracle.iter().sum();
    assert!((sum - 1.622e-2).abs() < 0.005e-2, "{sum}");
}

#[test]
fn baseline_exponents_match_oracle() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let e = baseline_exponents(&g, &b).unwrap();
    assert!(rel(e.step1, wkb_exponent_si(2.0 / 0.23, 0.0, 0.23, 0.0)) < 1e-10);
    assert!(rel(e.step2, 2.0 * kappa_si(1.0) * 0.7) < 1e-12);
    assert!(rel(e.step3, wkb_exponent_si(1.0 / 0.27, 0.93, 1.2, 0.0)) < 1e-10);
}

#[test]
fn exact_step2_ratio_is_exp_two_d4() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let up = rate_step2(&g, &b, SpinAlignment::parallel(), Mode::ExactWkb).unwrap();
    let down = rate_step2(&g, &b, SpinAlignment::antiparallel(), Mode::ExactWkb).unwrap();
    let d4 = d_constant_si(1e-3, 0.7, 1.0);
    assert!(rel((up / down).ln(), 2.0 * d4) < 1e-5);
}

#[test]
fn exact_step3_log_correction() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let w3 = 1.0 / 0.27;
    let up = rate_step3(&g, &b, SpinAlignment::parallel(), Mode::ExactWkb).unwrap();
    let base = (-wkb_exponent_si(w3, 0.93, 1.2, 0.0)).exp();
    let correction = (up / base).ln();
    let oracle = wkb_exponent_si(w3, 0.93, 1.2, 0.0) - wkb_exponent_si(w3, 0.93, 1.2, -0.001);
    assert!(rel(correction, oracle) < 1e-6);
    let expected = d_linear_si(1e-3, 1.2, w3) - d_linear_si(1e-3, 0.93, w3);
    assert!((correction - 0.7e-3).abs() < 0.02e-3, "{correction}");
    assert!(rel(correction, expected) < 1e-3);
}

#[test]
fn headline_contrast_from_oracle_sum() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let c = calibrate_baseline(&g, &b, 1000.0).unwrap();
    let r = spin_current(&g, &b, &c, Mode::PaperLinearized).unwrap();
    let w3 = 1.0 / 0.27;
    let sum = d_linear_si(1e-3, 0.23, 2.0 / 0.23)
        + d_linear_si(1e-3, 1.2, w3)
        + d_linear_si(1e-3, 0.93, w3)
        + d_constant_si(1e-3, 0.7, 1.0);
    assert!(rel(r.delta_plus(), 1000.0 * sum) < 1e-9);
    assert!((r.delta() - 32.44).abs() < 0.05);
}

#[test]
fn vibration_step1_perturbation_at_zero_time() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default().with_exchange(0.0).unwrap();
    let vib = VibrationModel::default();
    let still = instantaneous_rates(0.0, &g, &b, SpinAlignment::parallel(), &VibrationModel::still(), Mode::PaperLinearized).unwrap();
    let moved = instantaneous_rates(0.0, &g, &b, SpinAlignment::parallel(), &vib, Mode::PaperLinearized).unwrap();
    let exponent_ratio = moved.step1.ln() / still.step1.ln();
    let expected: f64 = 3.0 * 0.0015 / (2.0 * 0.23);
    assert!((expected - 9.78e-3).abs() < 0.01e-3);
    assert!((exponent_ratio - 1.0 - expected).abs() < 1e-12);
    assert_eq!(moved.step2, still.step2);
}

#[test]
fn quarter_period_window_keeps_vibration_bias() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let c = calibrate_baseline(&g, &b, 1000.0).unwrap();
    let vib = VibrationModel::default();
    let a = SpinAlignment::parallel();
    let t = std::f64::consts::FRAC_PI_2 / vib.omega();
    for mode in [Mode::PaperLinearized, Mode::ExactWkb] {
        let f = |s: f64| instantaneous_current(s, &g, &b, a, &vib, &c, mode).unwrap();
        let oracle = simpson(&f, 0.0, t, 1e-9 * t) / t;
        let lib = averaged_current(t, &g, &b, a, &vib, &c, mode).unwrap();
        let stat = averaged_current(t, &g, &b, a, &VibrationModel::still(), &c, mode).unwrap();
        assert!(rel(lib, oracle) < 1e-9, "{mode}: {lib} vs {oracle}");
        assert!((lib - stat).abs() > 1.0, "{mode}: bias {}", lib - stat);
    }
}

#[test]
fn dispersion_formula_value() {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    let d = linearization_factors(&g, &b);
    let v = mixed_spin_dispersion((0.99f64).sqrt(), 0.1, 100, &d).unwrap();
    assert!((v - 3.24e-4).abs() < 0.01e-4, "{v}");
}
