use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which leg of a translator call failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallLeg {
    Direct,
    Forward,
    Backward,
}

impl fmt::Display for CallLeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CallLeg::Direct => "direct",
            CallLeg::Forward => "forward",
            CallLeg::Backward => "backward",
        })
    }
}

/// What to do when a remote call fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicy {
    /// Abort on the first failure.
    #[default]
    Fail,
    /// Record the failure and continue without the failed item.
    Skip,
    /// Substitute a local scorer and record the substitution. Generation has no
    /// local substitute and treats this like `Skip`.
    Fallback,
}

impl std::str::FromStr for ErrorPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fail" => Ok(ErrorPolicy::Fail),
            "skip" => Ok(ErrorPolicy::Skip),
            "fallback" => Ok(ErrorPolicy::Fallback),
            other => Err(Error::invalid(format!("unknown error policy {other:?}"))),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate embedding for token {token:?}")]
    DegenerateEmbedding { token: String },

    #[error("remote scorer {endpoint} failed on batch {batch}: {message}")]
    RemoteScorer {
        endpoint: String,
        batch: usize,
        message: String,
    },

    #[error("translator call {src}->{tgt} ({leg}) failed: {message}")]
    Translator {
        src: String,
        tgt: String,
        leg: CallLeg,
        message: String,
    },

    #[error("language model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a remote service (scorer or translator transport).
    pub fn is_transport(&self) -> bool {
        matches!(self, Error::RemoteScorer { .. } | Error::Translator { .. })
    }
}
