use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid base {ch:?} at position {pos}")]
    InvalidBase { ch: char, pos: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("token universe too large (c={0}, supported range is 2..=12)")]
    UniverseTooLarge(u32),

    #[error("{0:?} is not a {1}-token")]
    NotAToken(String, u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid tag set configuration: {0}")]
    InvalidConfig(String),

    #[error("no tags")]
    NoTags,

    #[error("no pools")]
    NoPools,

    #[error("assignability condition not satisfied")]
    ConditionNotSatisfied,
}

pub type Result<T> = std::result::Result<T, Error>;
