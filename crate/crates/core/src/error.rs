use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sample with sequence number {seq} has no nonzero CSI entry")]
    ZeroSample { seq: u64 },

    #[error("streams share no common sequence number")]
    NoCommonSamples,

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("target {index} has zero L1 norm")]
    DegenerateTarget { index: usize },

    #[error("effective channel is singular or ill-conditioned (condition estimate {condition:.3e})")]
    SingularEffectiveChannel { condition: f64 },

    #[error("no candidate satisfies the constraints ({} evaluated)", .candidates.len())]
    Infeasible { candidates: Vec<crate::bop::CandidateRow> },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
