//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the simulation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("a route must contain at least one segment")]
    EmptyRoute,

    #[error("route repeats segment `{0}` in consecutive positions")]
    RepeatedSegment(String),

    #[error("no recorded route contains segment `{0}`")]
    NoHistory(String),

    #[error("invalid segment estimate for `{segment}`: {reason}")]
    InvalidEstimate { segment: String, reason: String },

    #[error("estimate list is empty")]
    EmptyEstimates,

    #[error("duplicate estimate for segment `{0}`")]
    DuplicateEstimate(String),

    #[error("energy budget must be nonnegative, got {0}")]
    NegativeBudget(f64),

    #[error("oracle instance too large: {segments} segments at resolution {resolution} (limits: 5 segments, resolution 100)")]
    OracleInstanceTooLarge { segments: usize, resolution: u32 },

    #[error("no assist fraction defined for segment `{0}`")]
    MissingSegment(String),

    #[error("moving-average window is empty")]
    EmptyWindow,

    #[error("consensus gain alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid cooperation gain profile: {0}")]
    InvalidGainProfile(String),

    #[error("step size {dt} exceeds the stability bound {bound} for this gain profile")]
    StepSizeTooLarge { dt: f64, bound: f64 },

    #[error("invalid controller parameter: {0}")]
    InvalidController(String),

    #[error("invalid cyclist parameter: {0}")]
    InvalidCyclist(String),

    #[error("calibration targets are infeasible: {0}")]
    InfeasibleTargets(String),

    #[error("scenario parse error at line {line}: {message}")]
    ScenarioParse { line: usize, message: String },

    #[error("scenario validation error: {0}")]
    ScenarioInvalid(String),

    #[error("{context} references unknown segment `{segment}`")]
    DanglingSegment { segment: String, context: String },

    #[error("telemetry parse error at line {line}: {message}")]
    TelemetryParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
