//! Doctor and patient accounts, login sessions and append-only medical
//! records.
//!
//! Users and records are persisted to a line-delimited JSON journal that is
//! only ever appended to and is replayed into memory on open. Records have
//! no update or delete path.

mod credential;
mod journal;
mod store;

pub use store::{
    MedicalRecord, NewRecord, RecordStore, Role, Session, User, DEFAULT_SESSION_LIFETIME, MIN_CREDENTIAL_LEN,
};

use thiserror::Error;

pub type Result<T, E = RecordsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("username `{0}` is already taken")]
    Conflict(String),
    #[error("{0}")]
    Validation(String),
    /// Bad credentials and missing, unknown or expired sessions alike.
    #[error("authentication failed")]
    Auth,
    #[error("{0}")]
    Forbidden(String),
    #[error("{0}")]
    NotFound(String),
    #[error("medical record {0} is immutable")]
    Immutable(u64),
    #[error("journal line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
