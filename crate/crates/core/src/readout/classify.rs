use crate::error::{ensure, Result};
use crate::physics::Spin;
use crate::stochastic::{CurrentTrace, Estimator};

/// Smallest current step an STM can resolve, pA.
pub const DEFAULT_RESOLUTION_PA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutDecision {
    /// `None` when the mean falls inside the resolution guard band.
    pub decided_spin: Option<Spin>,
    pub mean_current_pa: f64,
    pub threshold_pa: f64,
    pub margin_pa: f64,
    pub windows_used: usize,
}

/// Threshold decision on the mean current of `trace`.
///
/// A mean above `threshold + resolution/2` means the caged spin is parallel
/// to the tip (higher current), below `threshold - resolution/2` antiparallel.
pub fn classify(
    trace: &CurrentTrace,
    threshold_pa: f64,
    resolution_pa: f64,
    estimator: Estimator,
) -> Result<ReadoutDecision> {
    ensure(trace.windows() > 0, "trace", || "trace has no windows".to_string())?;
    ensure(
        estimator == Estimator::Counting || !trace.event_currents_pa.is_empty(),
        "trace",
        || "trace has no tunneling attempts".to_string(),
    )?;
    ensure(resolution_pa.is_finite() && resolution_pa >= 0.0, "resolution", || {
        format!("must be non-negative, got {resolution_pa} pA")
    })?;

    let mean = trace.mean(estimator);
    let half_band = 0.5 * resolution_pa;
    let decided_spin = if mean > threshold_pa + half_band {
        Some(trace.tip)
    } else if mean < threshold_pa - half_band {
        Some(trace.tip.flipped())
    } else {
        None
    };
    Ok(ReadoutDecision {
        decided_spin,
        mean_current_pa: mean,
        threshold_pa,
        margin_pa: (mean - threshold_pa).abs(),
        windows_used: trace.windows(),
    })
}
