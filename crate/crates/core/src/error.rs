use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("beamwidth {hpbw_deg}° is not attainable with at most {max_elements} elements")]
    Capability { hpbw_deg: f64, max_elements: usize },

    /// The blocker overlaps the direct path; the shadowing-period channel is
    /// not modelled.
    #[error("blocker inside the shadowing area (channel not modelled there)")]
    OutOfModel,

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
