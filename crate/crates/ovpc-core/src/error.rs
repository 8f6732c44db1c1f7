//! Crate-wide error umbrella with a coarse classification used by callers to
//! pick exit codes and HTTP statuses.

use thiserror::Error;

use crate::buffer::BufferError;
use crate::bench::BenchError;
use crate::eval::EvalError;
use crate::geom::GeomError;
use crate::ghpr::GhprError;
use crate::hull::HullError;
use crate::io::IoError;
use crate::navmap::NavMapError;
use crate::traversability::TravError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Ghpr(#[from] GhprError),
    #[error(transparent)]
    Traversability(#[from] TravError),
    #[error(transparent)]
    NavMap(#[from] NavMapError),
    #[error(transparent)]
    Buffer(#[from] BufferError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// What went wrong, coarsely: bad request parameters, bad data, or a failure
/// of the geometry pipeline itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Geometry,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) => ErrorKind::Data,
            Error::Geom(GeomError::NonFinitePoint { .. })
            | Error::Geom(GeomError::IntensityMismatch { .. }) => ErrorKind::Data,
            Error::Buffer(BufferError::DecreasingTimestamp { .. }) => ErrorKind::Data,
            Error::NavMap(NavMapError::InvalidData(_)) => ErrorKind::Data,
            Error::Ghpr(GhprError::InvalidConfig(_)) => ErrorKind::Usage,
            Error::Traversability(TravError::InvalidConfig(_)) => ErrorKind::Usage,
            Error::Buffer(BufferError::InvalidConfig(_)) => ErrorKind::Usage,
            Error::Eval(EvalError::InvalidSpec(_)) => ErrorKind::Usage,
            Error::Bench(BenchError::NoIterations) | Error::Bench(BenchError::NoClouds) => {
                ErrorKind::Usage
            }
            _ => ErrorKind::Geometry,
        }
    }
}
