use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error)]
pub enum LrdError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "sample too short: n = {n} but at least {min} values are needed for support length T = {t}"
    )]
    SampleTooShort { n: usize, min: usize, t: usize },

    #[error("scale {j} is out of range (maximal usable scale is {max})")]
    ScaleOutOfRange { j: usize, max: usize },

    #[error("non-positive scalogram value {value} at scale {j}")]
    NonPositiveScalogram { j: usize, value: f64 },

    #[error("memory parameter d = {d} outside the admissible range ({lo}, {hi}]")]
    InadmissibleMemory { d: f64, lo: f64, hi: f64 },

    #[error("weights violate the regression constraints: sum = {sum:e}, normalized slope - 1 = {slope:e}")]
    WeightConstraint { sum: f64, slope: f64 },

    #[error("minimizer sits on the boundary {bound} of the search interval [{lo}, {hi}]")]
    BoundarySolution { bound: f64, lo: f64, hi: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<LrdError>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LrdError>;

impl LrdError {
    /// True for errors caused by bad user input (including unreadable files)
    /// rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            LrdError::InvalidArgument(_) | LrdError::Parse(_) | LrdError::Json(_) | LrdError::Io(_)
        )
    }
}
