use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Ingest { offset: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot train on an empty token stream")]
    EmptyStream,

    #[error("non-finite value accumulated in the vector of {word:?}")]
    NonFinite { word: String },

    #[error("cannot merge tables with different {field}: {left} vs {right}")]
    ParamMismatch {
        field: &'static str,
        left: String,
        right: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vocabulary of {vocab} words exceeds the cap of {cap}")]
    Resource { vocab: usize, cap: usize },

    #[error("unknown word {word:?}{}", suggestion_suffix(.suggestions))]
    UnknownWord { word: String, suggestions: Vec<String> },

    #[error("cosine similarity is undefined for a zero vector")]
    UndefinedSimilarity,

    #[error("correlation is undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

fn suggestion_suffix(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (did you mean: {})", suggestions.join(", "))
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
