use fullerene_stm::physics::{calibrate_baseline, BarrierModel, DeviceGeometry, Spin};
use fullerene_stm::readout::{fidelity_curve, ReadoutSettings};
use fullerene_stm::stochastic::{Estimator, Scenario, VibrationModel};

fn scenario() -> Scenario {
    let g = DeviceGeometry::default();
    let b = BarrierModel::default();
    Scenario::new(g, b, calibrate_baseline(&g, &b, 1000.0).unwrap())
}

const TRIALS: u64 = 400;

#[test]
fn single_short_window_is_not_enough() {
    let r = fidelity_curve(&scenario(), &ReadoutSettings::default(), &[100e-9], TRIALS, 1).unwrap();
    assert!(r[0].down.fidelity() < 1.0);
    assert!(r[0].fidelity < 0.9, "{:?}", r[0]);
}

#[test]
fn zero_exchange_is_chance_level() {
    let s = scenario();
    let s = Scenario { barriers: s.barriers.with_exchange(0.0).unwrap(), ..s };
    let r = fidelity_curve(&s, &ReadoutSettings::default(), &[100e-9, 1e-6], TRIALS, 2).unwrap();
    for rep in r {
        let (lo, hi) = rep.wilson_interval;
        assert!(lo <= 0.5 && 0.5 <= hi, "{rep:?}");
    }
}

#[test]
fn fidelity_grows_with_integration_time() {
    let times = [100e-9, 1e-6, 3e-6];
    let r = fidelity_curve(&scenario(), &ReadoutSettings::default(), &times, TRIALS, 3).unwrap();
    for pair in r.windows(2) {
        let overlap = pair[0].wilson_interval.0 <= pair[1].wilson_interval.1;
        assert!(pair[1].fidelity >= pair[0].fidelity || overlap, "{pair:?}");
    }
    assert!(r[2].fidelity > r[0].fidelity);
}

#[test]
fn noiseless_readout_is_perfect() {
    let base = scenario();
    let s = Scenario {
        vibration: VibrationModel::still(),
        arrival: base.arrival.with_sigma(0.0).unwrap(),
        noise_floor_pa: 0.0,
        ..base
    };
    let settings = ReadoutSettings { estimator: Estimator::Literal, ..Default::default() };
    for rep in fidelity_curve(&s, &settings, &[100e-9, 1e-6], 100, 4).unwrap() {
        assert_eq!(rep.fidelity, 1.0);
        assert_eq!(rep.indeterminate_rate, 0.0);
    }
}

#[test]
fn relabeling_swaps_class_fidelities() {
    let s = scenario();
    let up_tip = fidelity_curve(&s, &ReadoutSettings::default(), &[200e-9], 200, 5).unwrap();
    let settings = ReadoutSettings { tip: Spin::Down, ..Default::default() };
    let down_tip = fidelity_curve(&s, &settings, &[200e-9], 200, 5).unwrap();
    assert_eq!(up_tip[0].up, down_tip[0].down);
    assert_eq!(up_tip[0].down, down_tip[0].up);
    assert_eq!(up_tip[0].fidelity, down_tip[0].fidelity);
}

#[test]
fn baseline_threshold_is_optimal() {
    let s = scenario();
    let i0 = s.calibration.baseline_current(&s.geometry, &s.barriers).unwrap();
    let t = [1e-6];
    let trials = 1000;
    let at = |offset: f64| {
        let settings = ReadoutSettings { threshold_pa: Some(i0 + offset), ..Default::default() };
        fidelity_curve(&s, &settings, &t, trials, 6).unwrap()[0].fidelity
    };
    let best = at(0.0);
    let se = (best * (1.0 - best) / (2.0 * trials as f64)).sqrt();
    for offset in [-12.0, -6.0, 6.0, 12.0] {
        let f = at(offset);
        assert!(best + 2.0 * se >= f, "offset {offset}: {f} vs {best}");
    }
}

#[test]
fn curves_are_deterministic() {
    let a = fidelity_curve(&scenario(), &ReadoutSettings::default(), &[100e-9], 50, 8).unwrap();
    let b = fidelity_curve(&scenario(), &ReadoutSettings::default(), &[100e-9], 50, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_trials_rejected() {
    assert!(fidelity_curve(&scenario(), &ReadoutSettings::default(), &[100e-9], 0, 1).is_err());
}
