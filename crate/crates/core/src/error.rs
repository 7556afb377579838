use thiserror::Error;

use crate::model::TokenId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("context of {len} tokens exceeds the model limit of {max}")]
    ContextTooLong { len: usize, max: usize },

    #[error("token id {id} is outside the vocabulary of size {size}")]
    UnknownTokenId { id: TokenId, size: usize },

    #[error("non-finite logit at token {0}")]
    NonFiniteLogits(TokenId),

    #[error("vocabulary has no single token for {0:?}")]
    TokenizerMissingYesNo(String),

    #[error("unknown knowledge base node {0:?}")]
    UnknownNode(String),

    #[error("entity {0} does not resolve against the knowledge base")]
    UnknownEntity(String),

    #[error("knowledge base too small: {0}")]
    KbTooSmall(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("sequence of {len} tokens is shorter than n={n}")]
    TooShort { len: usize, n: usize },

    #[error("text produced no tokens")]
    EmptyText,

    #[error("generations and instances are misaligned: {0}")]
    MisalignedIds(String),

    #[error("guidance unavailable: {0}")]
    GuidanceUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("bridge request failed: {0}")]
    Bridge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }

    /// True for failures that originate in a language model or its transport.
    pub fn is_model_error(&self) -> bool {
        matches!(
            self,
            Error::ContextTooLong { .. }
                | Error::UnknownTokenId { .. }
                | Error::NonFiniteLogits(_)
                | Error::TokenizerMissingYesNo(_)
                | Error::Bridge(_)
        )
    }
}
