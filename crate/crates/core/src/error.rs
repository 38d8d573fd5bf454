use thiserror::Error;

/// Errors produced while building or analysing LitS.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LitsError {
    #[error("empty neighborhood")]
    EmptyNeighborhood,

    #[error("neighbor inside ignored ball (r = {r}, r_p = {r_p})")]
    NeighborInsideBall { r: f64, r_p: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate neighborhood (copies of p)")]
    DegenerateNeighborhood,

    #[error("inconsistent geometry: {0}")]
    InconsistentGeometry(String),

    #[error("cap inconsistent with φ (half angle {half_angle}, φ {phi})")]
    CapInconsistent { half_angle: f64, phi: f64 },

    #[error("cumulative LitS cannot be inverted for φ = {phi}")]
    NotInvertible { phi: f64 },

    #[error(
        "root solver did not converge after {iterations} iterations \
         (last φ = {last}, residual = {residual}, bracket = [{lo}, {hi}])"
    )]
    NoConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{0}")]
    Parse(String),

    #[error("missing attribute `{0}`")]
    MissingAttribute(String),

    #[error("io error: {0}")]
    Io(String),
}

impl LitsError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LitsError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for LitsError {
    fn from(err: std::io::Error) -> Self {
        LitsError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LitsError>;
