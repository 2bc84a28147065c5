use thiserror::Error;

/// Errors raised by the tunneling model, the simulator and the readout layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("exchange energy {exchange_ev} eV is not below barrier `{barrier}` = {barrier_ev} eV")]
    NonPerturbative {
        barrier: &'static str,
        exchange_ev: f64,
        barrier_ev: f64,
    },

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("closed form {closed_form} and quadrature {quadrature} disagree (relative {relative:.3e})")]
    RouteMismatch {
        closed_form: f64,
        quadrature: f64,
        relative: f64,
    },

    #[error("transmission product {0:e} underflows; geometry out of range")]
    TransmissionUnderflow(f64),

    #[error("vibration amplitude {amplitude_nm} nm closes a {gap_nm} nm gap")]
    GapClosed { amplitude_nm: f64, gap_nm: f64 },

    #[error("peak current {peak_pa:.3} pA exceeds the attempt-rate current {attempt_pa:.3} pA")]
    AttemptRateExceeded { peak_pa: f64, attempt_pa: f64 },

    #[error("duration {duration_s:e} s is shorter than one window of {window_s:e} s")]
    EmptyTrace { duration_s: f64, window_s: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason(),
        })
    }
}
