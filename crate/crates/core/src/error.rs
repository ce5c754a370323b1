use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value violates a documented bound. `field` names the offending input.
    #[error("invalid parameter `{field}`: {message}")]
    Param { field: String, message: String },

    #[error("size mismatch: snapshot has {snapshot} nodes, topology has {topology}")]
    SizeMismatch { snapshot: usize, topology: usize },

    #[error("series `{name}` too short: need {needed} entries, have {available}")]
    SeriesTooShort {
        name: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: duplicate date {date}")]
    DuplicateDate { path: PathBuf, date: NaiveDate },

    #[error("{path}: missing date {date} (gap in series)")]
    MissingDate { path: PathBuf, date: NaiveDate },

    #[error("date spans differ: {left} vs {right}")]
    DateMismatch { left: String, right: String },

    #[error("illegal transition for node {node} on day {day}: {from:?} -> {to:?}")]
    IllegalTransition {
        node: u32,
        day: u32,
        from: crate::Status,
        to: crate::Status,
    },

    #[error("invalid node history: {0}")]
    History(String),

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Param {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input (as opposed to I/O or runtime failures).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv { .. })
    }
}
