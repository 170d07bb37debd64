use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate sequence: variance {variance:e} before normalization")]
    DegenerateSequence { variance: f64 },

    #[error("non-positive coupling {value} at index {index}")]
    NonPositiveCoupling { index: usize, value: f64 },

    #[error("eigensolver did not converge for eigenvalue {index} (off-diagonal residual {residual:e})")]
    NoConvergence { index: usize, residual: f64 },

    #[error("resonant mode: use three_level (mode {mode}, gap {gap:e})")]
    ResonantMode { mode: usize, gap: f64 },

    #[error("receiver decoupled from mode {mode} (a_rk = {overlap:e})")]
    ReceiverDecoupled { mode: usize, overlap: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("realization with seed {seed} failed: {source}")]
    Realization {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
