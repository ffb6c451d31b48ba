use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("eigendecomposition of the {dim}x{dim} cos²θ block (m = {m}) failed: {detail}")]
    Numerical { m: i32, dim: usize, detail: String },

    #[error("pulse {index} has a finite width; propagate it with the finite-pulse model")]
    WrongModel { index: usize },

    #[error(
        "truncation leak after pulse {pulse_index}: population {population:.3e} in the top two \
         levels of a J_max = {j_max} basis exceeds {threshold:.1e}"
    )]
    TruncationLeak {
        pulse_index: usize,
        population: f64,
        threshold: f64,
        j_max: u32,
    },

    #[error("step {dt} is coarser than fwhm/4 = {limit}")]
    StepTooCoarse { dt: f64, limit: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("incomplete ensemble: no result for member (J0 = {j0}, m0 = {m0})")]
    IncompleteEnsemble { j0: u32, m0: i32 },

    #[error("invalid configuration at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("ensemble member (J0 = {j0}, m0 = {m0}): {source}")]
    Member {
        j0: u32,
        m0: i32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's configuration rather than by
    /// the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::InvalidBasis(_) | Error::Domain(_) => true,
            Error::Member { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
