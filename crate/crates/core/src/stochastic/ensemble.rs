use rayon::prelude::*;

use super::trace::{simulate_trial, Estimator, MixedSpinState, Scenario, SpinSource};
use crate::error::{ensure, Result};
use crate::physics::Spin;

/// Per-trial mean currents (pA) of `trials` independent traces, ordered by
/// trial index.
pub fn ensemble_means(
    scenario: &Scenario,
    spin: &SpinSource,
    duration_s: f64,
    trials: u64,
    master_seed: u64,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| Ok(simulate_trial(scenario, spin, duration_s, master_seed, trial)?.mean(estimator)))
        .collect()
}

/// Sample mean and (n-1) standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEstimate {
    pub n_events: u64,
    pub trials: u64,
    pub mean_pa: f64,
    pub std_pa: f64,
    /// Spin-independent current of the scenario.
    pub i0_pa: f64,
}

impl DispersionEstimate {
    /// `std / I0`, comparable with [`mixed_spin_dispersion`](super::mixed_spin_dispersion).
    pub fn relative(&self) -> f64 {
        self.std_pa / self.i0_pa
    }
}

/// Monte Carlo spread of the per-electron averaged current for a mixed
/// caged spin. Each trace covers `n_events` mean spacings and is reduced
/// with the literal estimator.
pub fn dispersion_monte_carlo(
    scenario: &Scenario,
    tip: Spin,
    state: MixedSpinState,
    n_events: u64,
    trials: u64,
    master_seed: u64,
) -> Result<DispersionEstimate> {
    ensure(n_events >= 1, "N", || "need at least one tunneling event".to_string())?;
    ensure(trials >= 2, "trials", || format!("need at least 2 trials, got {trials}"))?;
    let duration = (n_events as f64 + 0.5) * scenario.arrival.t0();
    let scenario = Scenario {
        arrival: scenario.arrival.with_window(duration)?,
        ..*scenario
    };
    let means = ensemble_means(
        &scenario,
        &SpinSource::Mixed { tip, state },
        duration,
        trials,
        master_seed,
        Estimator::Literal,
    )?;
    let (mean_pa, std_pa) = mean_and_std(&means);
    Ok(DispersionEstimate {
        n_events,
        trials,
        mean_pa,
        std_pa,
        i0_pa: scenario.calibration.baseline_current(&scenario.geometry, &scenario.barriers)?,
    })
}
