use rayon::prelude::*;

use super::classify::{classify, DEFAULT_RESOLUTION_PA};
use crate::error::{ensure, Result};
use crate::physics::{Spin, SpinAlignment};
use crate::stochastic::{simulate_trial, Estimator, Scenario, SpinSource};

const WILSON_Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval (95 %) for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = WILSON_Z95 * WILSON_Z95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = WILSON_Z95 / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassTally {
    pub correct: u64,
    pub wrong: u64,
    pub indeterminate: u64,
}

impl ClassTally {
    pub fn total(&self) -> u64 {
        self.correct + self.wrong + self.indeterminate
    }
    pub fn fidelity(&self) -> f64 {
        self.correct as f64 / self.total() as f64
    }
    pub fn error_rate(&self) -> f64 {
        self.wrong as f64 / self.total() as f64
    }
    pub fn indeterminate_rate(&self) -> f64 {
        self.indeterminate as f64 / self.total() as f64
    }
    fn add(&mut self, truth: Spin, decided: Option<Spin>) {
        match decided {
            None => self.indeterminate += 1,
            Some(s) if s == truth => self.correct += 1,
            Some(_) => self.wrong += 1,
        }
    }
}

/// Readout quality at one integration time; `trials` traces per spin class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub integration_time_s: f64,
    pub trials: u64,
    /// Fraction of correct decisions over both classes.
    pub fidelity: f64,
    pub wilson_interval: (f64, f64),
    pub indeterminate_rate: f64,
    pub up: ClassTally,
    pub down: ClassTally,
}

impl FidelityReport {
    fn from_tallies(integration_time_s: f64, trials: u64, up: ClassTally, down: ClassTally) -> Self {
        let correct = up.correct + down.correct;
        let n = up.total() + down.total();
        Self {
            integration_time_s,
            trials,
            fidelity: correct as f64 / n as f64,
            wilson_interval: wilson_interval(correct, n),
            indeterminate_rate: (up.indeterminate + down.indeterminate) as f64 / n as f64,
            up,
            down,
        }
    }
}

/// Decision rule used by [`fidelity_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSettings {
    pub tip: Spin,
    /// `None` thresholds at the spin-independent current `I0`.
    pub threshold_pa: Option<f64>,
    pub resolution_pa: f64,
    pub estimator: Estimator,
}

impl Default for ReadoutSettings {
    fn default() -> Self {
        Self {
            tip: Spin::Up,
            threshold_pa: None,
            resolution_pa: DEFAULT_RESOLUTION_PA,
            estimator: Estimator::Counting,
        }
    }
}

/// Classifies `trials` caged-up and `trials` caged-down traces at every
/// integration time. Trial `i` of either class and of every integration time
/// uses the same random streams.
pub fn fidelity_curve(
    scenario: &Scenario,
    settings: &ReadoutSettings,
    integration_times_s: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<FidelityReport>> {
    ensure(trials >= 1, "trials", || "need at least one trial".to_string())?;
    if trials < 100 {
        log::warn!("{trials} trials per class is too few for meaningful Wilson intervals");
    }
    let threshold = match settings.threshold_pa {
        Some(t) => t,
        None => scenario
            .calibration
            .baseline_current(&scenario.geometry, &scenario.barriers)?,
    };
    let up = SpinSource::Pure(SpinAlignment::new(settings.tip, Spin::Up));
    let down = SpinSource::Pure(SpinAlignment::new(settings.tip, Spin::Down));

    integration_times_s
        .iter()
        .map(|&t_int| {
            let outcomes: Vec<(Option<Spin>, Option<Spin>)> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let decide = |src: &SpinSource| -> Result<Option<Spin>> {
                        let trace = simulate_trial(scenario, src, t_int, master_seed, trial)?;
                        Ok(classify(&trace, threshold, settings.resolution_pa, settings.estimator)?.decided_spin)
                    };
                    Ok((decide(&up)?, decide(&down)?))
                })
                .collect::<Result<_>>()?;
            let mut up_tally = ClassTally::default();
            let mut down_tally = ClassTally::default();
            for (u, d) in outcomes {
                up_tally.add(Spin::Up, u);
                down_tally.add(Spin::Down, d);
            }
            Ok(FidelityReport::from_tallies(t_int, trials, up_tally, down_tally))
        })
        .collect()
}
