use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::seeding::{stream_rng, StreamPurpose};
use crate::error::{ensure, Result};

/// Statistics of the spacing between successive tunneling attempts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrivalProcess {
    /// Normal spacings `N(t0, σ)`, truncated to positive values.
    #[default]
    Normal,
    /// Exponential spacings with mean `t0`.
    Poisson,
}

/// Electron attempt statistics. Times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalModel {
    t0: f64,
    sigma: f64,
    window: f64,
    process: ArrivalProcess,
}

impl ArrivalModel {
    pub const DEFAULT_T0_S: f64 = 100e-12;
    pub const DEFAULT_SIGMA_S: f64 = 10e-12;
    pub const DEFAULT_WINDOW_S: f64 = 100e-9;

    pub fn new(t0_s: f64, sigma_s: f64, window_s: f64, process: ArrivalProcess) -> Result<Self> {
        ensure(t0_s.is_finite() && t0_s > 0.0, "t0", || format!("mean spacing must be positive, got {t0_s} s"))?;
        ensure(sigma_s.is_finite() && sigma_s >= 0.0, "sigma", || {
            format!("jitter must be non-negative, got {sigma_s} s")
        })?;
        ensure(window_s.is_finite() && window_s > 0.0, "window", || {
            format!("window must be positive, got {window_s} s")
        })?;
        Ok(Self {
            t0: t0_s,
            sigma: sigma_s,
            window: window_s,
            process,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn window(&self) -> f64 {
        self.window
    }
    pub fn process(&self) -> ArrivalProcess {
        self.process
    }

    pub fn with_sigma(&self, sigma_s: f64) -> Result<Self> {
        Self::new(self.t0, sigma_s, self.window, self.process)
    }

    pub fn with_window(&self, window_s: f64) -> Result<Self> {
        Self::new(self.t0, self.sigma, window_s, self.process)
    }

    pub fn with_process(&self, process: ArrivalProcess) -> Self {
        Self { process, ..*self }
    }

    /// Jitter wide enough that discarding non-positive spacings visibly skews
    /// the spacing distribution.
    pub fn truncation_is_material(&self) -> bool {
        self.process == ArrivalProcess::Normal && self.sigma > 0.5 * self.t0
    }
}

impl Default for ArrivalModel {
    fn default() -> Self {
        Self {
            t0: Self::DEFAULT_T0_S,
            sigma: Self::DEFAULT_SIGMA_S,
            window: Self::DEFAULT_WINDOW_S,
            process: ArrivalProcess::Normal,
        }
    }
}

pub(crate) fn sample_arrivals_with<R: Rng>(model: &ArrivalModel, duration: f64, rng: &mut R) -> Vec<f64> {
    let mut times = Vec::with_capacity((duration / model.t0 * 1.05) as usize + 8);
    let mut t = 0.0;
    match model.process {
        ArrivalProcess::Normal => {
            let spacing = Normal::new(model.t0, model.sigma).expect("validated jitter");
            loop {
                let mut dt = spacing.sample(rng);
                while dt <= 0.0 {
                    dt = spacing.sample(rng);
                }
                t += dt;
                if t >= duration {
                    break;
                }
                times.push(t);
            }
        }
        ArrivalProcess::Poisson => {
            let spacing = Exp::new(1.0 / model.t0).expect("validated mean spacing");
            loop {
                t += spacing.sample(rng);
                if t >= duration {
                    break;
                }
                times.push(t);
            }
        }
    }
    times
}

/// Attempt times in `(0, duration)`, strictly increasing.
pub fn sample_arrivals(model: &ArrivalModel, duration_s: f64, seed: u64) -> Result<Vec<f64>> {
    ensure(duration_s.is_finite() && duration_s > 0.0, "duration", || {
        format!("must be positive, got {duration_s} s")
    })?;
    if model.truncation_is_material() {
        log::warn!(
            "arrival jitter {:e} s exceeds half the mean spacing {:e} s; truncation skews spacings",
            model.sigma,
            model.t0
        );
    }
    let mut rng = stream_rng(seed, 0, StreamPurpose::Arrivals);
    Ok(sample_arrivals_with(model, duration_s, &mut rng))
}
