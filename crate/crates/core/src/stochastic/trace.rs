use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::arrivals::{sample_arrivals_with, ArrivalModel};
use super::seeding::{stream_rng, StreamPurpose};
use super::vibration::{CurrentKernel, VibrationModel};
use crate::constants::ELEMENTARY_CHARGE_PA_S;
use crate::error::{ensure, Error, Result};
use crate::physics::{BarrierModel, Calibration, DeviceGeometry, Mode, Spin, SpinAlignment};

/// Caged spin in `F|↑⟩ + G|↓⟩` with real non-negative amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedSpinState {
    f: f64,
    g: f64,
}

impl MixedSpinState {
    pub fn new(f: f64, g: f64) -> Result<Self> {
        ensure(f >= 0.0 && g >= 0.0, "amplitudes", || format!("must be non-negative, got F = {f}, G = {g}"))?;
        ensure((f * f + g * g - 1.0).abs() <= 1e-12, "amplitudes", || {
            format!("F² + G² must be 1, got {}", f * f + g * g)
        })?;
        Ok(Self { f, g })
    }

    /// State with down amplitude `g` and `F = sqrt(1 - G²)`.
    pub fn from_down_amplitude(g: f64) -> Result<Self> {
        ensure((0.0..=1.0).contains(&g), "G", || format!("must lie in [0, 1], got {g}"))?;
        Self::new((1.0 - g * g).sqrt(), g)
    }

    pub fn pure(spin: Spin) -> Self {
        match spin {
            Spin::Up => Self { f: 1.0, g: 0.0 },
            Spin::Down => Self { f: 0.0, g: 1.0 },
        }
    }

    pub fn f(&self) -> f64 {
        self.f
    }
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn probability_up(&self) -> f64 {
        self.f * self.f
    }

    /// The minority amplitude, `min(F, G)`.
    pub fn minority_amplitude(&self) -> f64 {
        self.f.min(self.g)
    }
}

/// How the caged spin is prepared for a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinSource {
    /// Definite alignment for every event.
    Pure(SpinAlignment),
    /// Each event projects the caged spin independently: up with `F²`.
    Mixed { tip: Spin, state: MixedSpinState },
}

impl SpinSource {
    pub fn tip(&self) -> Spin {
        match self {
            SpinSource::Pure(a) => a.tip,
            SpinSource::Mixed { tip, .. } => *tip,
        }
    }

    /// Swaps the caged spin (or the F/G amplitudes).
    pub fn relabeled(&self) -> Self {
        match *self {
            SpinSource::Pure(a) => SpinSource::Pure(SpinAlignment::new(a.tip, a.caged.flipped())),
            SpinSource::Mixed { tip, state } => SpinSource::Mixed {
                tip,
                state: MixedSpinState { f: state.g, g: state.f },
            },
        }
    }

    fn possible_caged(&self) -> Vec<Spin> {
        match self {
            SpinSource::Pure(a) => vec![a.caged],
            SpinSource::Mixed { state, .. } => {
                let mut v = Vec::with_capacity(2);
                if state.f > 0.0 {
                    v.push(Spin::Up);
                }
                if state.g > 0.0 {
                    v.push(Spin::Down);
                }
                v
            }
        }
    }
}

/// Which per-trace mean current a consumer looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Accepted-charge counting per window, `e·n / T_window`.
    #[default]
    Counting,
    /// Mean of the instantaneous current over attempt times, `(1/N) Σ I(tᵢ)`.
    Literal,
}

/// Everything about the device and the measurement except the spin state
/// and the record length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub geometry: DeviceGeometry,
    pub barriers: BarrierModel,
    pub vibration: VibrationModel,
    pub arrival: ArrivalModel,
    pub calibration: Calibration,
    pub mode: Mode,
    /// Standard deviation of white noise added to each window current, pA.
    pub noise_floor_pa: f64,
}

impl Scenario {
    pub const DEFAULT_NOISE_FLOOR_PA: f64 = 0.1;

    /// Default vibration, arrivals, mode and noise floor around a device.
    pub fn new(geometry: DeviceGeometry, barriers: BarrierModel, calibration: Calibration) -> Self {
        Self {
            geometry,
            barriers,
            vibration: VibrationModel::default(),
            arrival: ArrivalModel::default(),
            calibration,
            mode: Mode::PaperLinearized,
            noise_floor_pa: Self::DEFAULT_NOISE_FLOOR_PA,
        }
    }

    /// Current carried by one accepted event per attempt, `e / t0`, in pA.
    pub fn attempt_current_pa(&self) -> f64 {
        ELEMENTARY_CHARGE_PA_S / self.arrival.t0()
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.noise_floor_pa.is_finite() && self.noise_floor_pa >= 0.0, "noise_floor", || {
            format!("must be non-negative, got {} pA", self.noise_floor_pa)
        })?;
        self.vibration.check_gaps(&self.geometry)
    }
}

/// Seeded record of one simulated measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    pub seed: u64,
    pub trial: u64,
    pub tip: Spin,
    /// Attempt times, s.
    pub event_times: Vec<f64>,
    pub per_event_spin: Vec<Spin>,
    /// Whether the attempt tunneled (rate-proportional thinning).
    pub accepted: Vec<bool>,
    /// Instantaneous current at each attempt, pA.
    pub event_currents_pa: Vec<f64>,
    pub window_length_s: f64,
    pub window_counts: Vec<u32>,
    /// `e · count / window_length` plus the white-noise floor, pA.
    pub window_currents_pa: Vec<f64>,
}

impl CurrentTrace {
    pub fn windows(&self) -> usize {
        self.window_currents_pa.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.window_length_s * self.windows() as f64
    }

    pub fn window_start_s(&self, index: usize) -> f64 {
        self.window_length_s * index as f64
    }

    pub fn accepted_events(&self) -> usize {
        self.accepted.iter().filter(|&&a| a).count()
    }

    pub fn counting_mean(&self) -> f64 {
        self.window_currents_pa.iter().sum::<f64>() / self.windows() as f64
    }

    /// `NaN` for a trace without attempts.
    pub fn literal_mean(&self) -> f64 {
        self.event_currents_pa.iter().sum::<f64>() / self.event_currents_pa.len() as f64
    }

    pub fn mean(&self, estimator: Estimator) -> f64 {
        match estimator {
            Estimator::Counting => self.counting_mean(),
            Estimator::Literal => self.literal_mean(),
        }
    }
}

/// One trace from stream 0 of `seed`; see [`simulate_trial`].
pub fn simulate_trace(scenario: &Scenario, spin: &SpinSource, duration_s: f64, seed: u64) -> Result<CurrentTrace> {
    simulate_trial(scenario, spin, duration_s, seed, 0)
}

/// Simulates `floor(duration / window)` whole windows.
///
/// Attempts arrive per the arrival model. At each attempt the caged spin is
/// sampled, the instantaneous current `I(tᵢ)` is evaluated and the attempt is
/// accepted with probability `I(tᵢ) / (e/t0)`, so the expected counted current
/// equals the instantaneous current.
pub fn simulate_trial(
    scenario: &Scenario,
    spin: &SpinSource,
    duration_s: f64,
    seed: u64,
    trial: u64,
) -> Result<CurrentTrace> {
    scenario.validate()?;
    let window = scenario.arrival.window();
    ensure(duration_s.is_finite() && duration_s > 0.0, "duration", || {
        format!("must be positive, got {duration_s} s")
    })?;
    // Tolerate rounding when the duration is meant as an exact multiple.
    let n_windows = (duration_s / window * (1.0 + 1e-12)).floor() as usize;
    if n_windows == 0 {
        return Err(Error::EmptyTrace {
            duration_s,
            window_s: window,
        });
    }
    let span = window * n_windows as f64;

    let kernel = CurrentKernel::new(
        &scenario.geometry,
        &scenario.barriers,
        &scenario.vibration,
        &scenario.calibration,
        scenario.mode,
    )?;
    let attempt = scenario.attempt_current_pa();
    let tip = spin.tip();
    for caged in spin.possible_caged() {
        let peak = kernel.peak(tip.sign() * caged.sign());
        if peak > attempt {
            return Err(Error::AttemptRateExceeded {
                peak_pa: peak,
                attempt_pa: attempt,
            });
        }
    }

    let event_times = sample_arrivals_with(
        &scenario.arrival,
        span,
        &mut stream_rng(seed, trial, StreamPurpose::Arrivals),
    );
    let mut spin_rng = stream_rng(seed, trial, StreamPurpose::Spins);
    let mut accept_rng = stream_rng(seed, trial, StreamPurpose::Acceptance);

    let n = event_times.len();
    let mut per_event_spin = Vec::with_capacity(n);
    let mut accepted = Vec::with_capacity(n);
    let mut event_currents_pa = Vec::with_capacity(n);
    let mut window_counts = vec![0u32; n_windows];

    for &t in &event_times {
        let caged = match spin {
            SpinSource::Pure(a) => a.caged,
            SpinSource::Mixed { state, .. } => {
                if spin_rng.random::<f64>() < state.probability_up() {
                    Spin::Up
                } else {
                    Spin::Down
                }
            }
        };
        let current = kernel.at(t, tip.sign() * caged.sign());
        let hit = accept_rng.random::<f64>() * attempt < current;
        if hit {
            let w = ((t / window) as usize).min(n_windows - 1);
            window_counts[w] += 1;
        }
        per_event_spin.push(caged);
        accepted.push(hit);
        event_currents_pa.push(current);
    }

    let mut window_currents_pa: Vec<f64> = window_counts
        .iter()
        .map(|&c| ELEMENTARY_CHARGE_PA_S * c as f64 / window)
        .collect();
    if scenario.noise_floor_pa > 0.0 {
        let mut noise_rng = stream_rng(seed, trial, StreamPurpose::Noise);
        let noise = Normal::new(0.0, scenario.noise_floor_pa).expect("validated noise floor");
        for w in &mut window_currents_pa {
            *w += noise.sample(&mut noise_rng);
        }
    }

    Ok(CurrentTrace {
        seed,
        trial,
        tip,
        event_times,
        per_event_spin,
        accepted,
        event_currents_pa,
        window_length_s: window,
        window_counts,
        window_currents_pa,
    })
}
