use thiserror::Error;

use crate::dp_plus::CacheError;
use crate::hierarchy::HierarchyError;
use crate::oracle::TargetError;
use crate::penalty::PenaltyError;
use crate::session::SessionError;
use crate::synth::SynthError;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("{0}")]
    Config(String),
    #[error("query object {index}: {source}")]
    Object {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
