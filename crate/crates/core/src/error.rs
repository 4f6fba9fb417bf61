use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no updates supplied")]
    EmptyUpdates,

    #[error("update length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("krum needs N >= f + 3 (N = {n}, f = {f})")]
    KrumTooFewClients { n: usize, f: usize },

    #[error("dataset too small: {samples} samples cannot cover {clients} clients")]
    DatasetTooSmall { samples: usize, clients: usize },

    #[error("holdout split leaves class {class} empty")]
    EmptyClass { class: usize },

    #[error("client {client} diverged in round {round}: non-finite parameters")]
    Divergence { client: usize, round: usize },

    #[error("global model became non-finite in round {round}")]
    GlobalDivergence { round: usize },

    #[error("update statistics overflowed in round {round}; training has diverged")]
    StateOverflow { round: usize },

    #[error("training produced non-finite parameters")]
    NonFinite,

    #[error("arm {arm} has a numerically singular design matrix")]
    SingularArm { arm: usize },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
