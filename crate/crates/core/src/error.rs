use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("duplicate column name: {0}")]
    DuplicateColumn(String),
    #[error("column {column} has {actual} values, frame has {expected} rows")]
    LengthMismatch { column: String, expected: usize, actual: usize },
    #[error("group-aggregate requires at least one key column")]
    EmptyGroupKeys,
    #[error("pivot has duplicate entries for ({index}, {column}) and no aggregation")]
    PivotDuplicate { index: String, column: String },
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("intent has no resolvable clause: {0}")]
    UnresolvableIntent(String),
    #[error("cannot enumerate values of {0}: too many distinct values")]
    WildcardOverCappedColumn(String),
    #[error("action already registered: {0}")]
    DuplicateAction(String),
    #[error("no such action: {0}")]
    UnknownAction(String),
}
