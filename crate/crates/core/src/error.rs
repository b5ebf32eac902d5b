use thiserror::Error;

/// Errors produced by the identification and control-design routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition. `field` names the offending value.
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("insufficient excitation: reference coefficient {magnitude:e} is below floor {floor:e}")]
    InsufficientExcitation { magnitude: f64, floor: f64 },

    #[error("record too short: need {needed} samples, have {available}")]
    RecordTooShort { needed: usize, available: usize },

    #[error("rank-deficient regression: {0}")]
    RankDeficient(String),

    #[error("non-physical fit: {0}")]
    NonPhysicalFit(String),

    #[error("frequency grid mismatch at sample {index}: {expected} vs {found} rad/s")]
    GridMismatch { index: usize, expected: f64, found: f64 },

    #[error("perfect-fit degenerate F statistic: full-model RSS is zero")]
    PerfectFit,

    #[error("infeasible margin: phi = {phi_deg} deg must be below atan(c_h) = {limit_deg} deg")]
    InfeasibleMargin { phi_deg: f64, limit_deg: f64 },

    #[error("crossover {omega_c} rad/s outside the admissible band ({lo}, {hi}) rad/s")]
    CrossoverOutOfBand { omega_c: f64, lo: f64, hi: f64 },

    #[error(
        "lag cascade with {n} sections exceeds the phase ripple tolerance; at least {required} sections are needed"
    )]
    InsufficientSections { n: usize, required: usize },

    #[error("lag cascade band [{lo}, {hi}] rad/s is too narrow for a {tolerance_deg} deg phase tolerance")]
    BandTooNarrow { lo: f64, hi: f64, tolerance_deg: f64 },

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed or out-of-range inputs, as opposed
    /// to numerical failures on otherwise valid data.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput { .. }
                | Error::InfeasibleMargin { .. }
                | Error::CrossoverOutOfBand { .. }
                | Error::RecordTooShort { .. }
                | Error::GridMismatch { .. }
                | Error::Io(_)
                | Error::Format(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
