use crate::constants::ELEMENTARY_CHARGE_PA_S;
use crate::error::{ensure, Result};
use crate::physics::sweep_delta_vs_d1;
use crate::stochastic::{ArrivalProcess, Scenario};

use super::classify::DEFAULT_RESOLUTION_PA;

/// Standard deviation (pA) of the counting-estimator mean current over
/// `integration_time_s` for a true current `current_pa`.
///
/// Attempts number `n = T/t0`; each is accepted with `p = I/(e/t0)`. The
/// accepted count has variance `n p (1-p) + p² n (σ/t0)²` for jittered
/// arrivals and `n p` for Poisson arrivals. The per-window white-noise floor
/// adds `floor / sqrt(windows)`.
pub fn counting_noise_std(scenario: &Scenario, current_pa: f64, integration_time_s: f64) -> Result<f64> {
    ensure(integration_time_s.is_finite() && integration_time_s > 0.0, "integration_time", || {
        format!("must be positive, got {integration_time_s} s")
    })?;
    let window = scenario.arrival.window();
    let windows = (integration_time_s / window * (1.0 + 1e-12)).floor();
    ensure(windows >= 1.0, "integration_time", || {
        format!("{integration_time_s} s is shorter than one {window} s window")
    })?;
    let span = windows * window;
    let t0 = scenario.arrival.t0();
    let n = span / t0;
    let p = current_pa / scenario.attempt_current_pa();
    let count_var = match scenario.arrival.process() {
        ArrivalProcess::Normal => {
            let jitter = scenario.arrival.sigma() / t0;
            n * p * (1.0 - p) + p * p * n * jitter * jitter
        }
        ArrivalProcess::Poisson => n * p,
    };
    let counting = ELEMENTARY_CHARGE_PA_S / span * count_var.max(0.0).sqrt();
    let floor = scenario.noise_floor_pa / windows.sqrt();
    Ok(counting.hypot(floor))
}

/// Statistical noise assumed by [`distinguishability_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    #[default]
    CountingStatistics,
    /// Only the instrument resolution limits detection.
    Noiseless,
}

/// `|ΔI| > max(resolution, k·noise_std)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectabilityCriterion {
    pub resolution_pa: f64,
    /// Multiple of the single-class noise std that `ΔI` must exceed. The
    /// decision margin of each class is `ΔI/2`, so `k = 5` leaves 2.5σ.
    pub k_sigma: f64,
    pub noise: NoiseModel,
}

impl DetectabilityCriterion {
    pub const DEFAULT_K_SIGMA: f64 = 5.0;
}

impl Default for DetectabilityCriterion {
    fn default() -> Self {
        Self {
            resolution_pa: DEFAULT_RESOLUTION_PA,
            k_sigma: Self::DEFAULT_K_SIGMA,
            noise: NoiseModel::CountingStatistics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishabilityRow {
    pub d1_nm: f64,
    pub delta_pa: f64,
    pub noise_std_pa: f64,
    /// `|ΔI| / noise_std`; infinite without noise.
    pub snr: f64,
    pub detectable: bool,
}

/// Spin contrast against measurement noise over a range of tip heights. The
/// scenario supplies the cage/substrate gaps, barriers, calibration, arrival
/// statistics and mode.
pub fn distinguishability_sweep(
    d1_range: (f64, f64),
    steps: usize,
    scenario: &Scenario,
    criterion: &DetectabilityCriterion,
    integration_time_s: f64,
) -> Result<Vec<DistinguishabilityRow>> {
    ensure(criterion.k_sigma.is_finite() && criterion.k_sigma >= 0.0, "k_sigma", || {
        format!("must be non-negative, got {}", criterion.k_sigma)
    })?;
    let rows = sweep_delta_vs_d1(
        d1_range,
        steps,
        &scenario.geometry,
        &scenario.barriers,
        &scenario.calibration,
        scenario.mode,
    )?;
    rows.into_iter()
        .map(|row| {
            let delta = row.result.delta();
            let noise_std = match criterion.noise {
                NoiseModel::CountingStatistics => counting_noise_std(scenario, row.result.i0_pa, integration_time_s)?,
                NoiseModel::Noiseless => 0.0,
            };
            let snr = if noise_std > 0.0 { delta.abs() / noise_std } else { f64::INFINITY };
            Ok(DistinguishabilityRow {
                d1_nm: row.d1_nm,
                delta_pa: delta,
                noise_std_pa: noise_std,
                snr,
                detectable: delta.abs() > criterion.resolution_pa.max(criterion.k_sigma * noise_std),
            })
        })
        .collect()
}
