use std::io;

use thiserror::Error;

use crate::protocol::wire::FrameError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no identities supplied")]
    EmptyInput,

    #[error("record {index}: expected {expected} features, found {found}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("record {index}: feature {position} is not finite")]
    NonFinite { index: usize, position: usize },

    #[error("record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error("confidence threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("feature position {position} out of range for N = {n}")]
    PositionOutOfRange { position: usize, n: usize },

    #[error("feature position {0} already received")]
    DuplicatePosition(usize),

    #[error("no features received yet")]
    NoFeatures,

    #[error("cannot force a decision after {used} of {n} features")]
    NotSaturated { used: usize, n: usize },

    #[error("expected {expected} elements, found {found}")]
    ElementCountMismatch { expected: usize, found: usize },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not place {k} centers {separation} apart in {n} dimensions after {attempts} attempts")]
    InfeasiblePlacement {
        k: usize,
        n: usize,
        separation: f64,
        attempts: usize,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("frame: {0}")]
    Frame(#[from] FrameError),

    #[error("semantic base digest mismatch (local {local}, peer {peer})")]
    DigestMismatch { local: String, peer: String },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("peer reported error {code}: {text}")]
    Peer { code: u16, text: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}
