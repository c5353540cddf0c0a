use thiserror::Error;

use crate::berryphase::PhaseError;
use crate::cilocate::CiError;
use crate::comoving::ComovingError;
use crate::eigenpath::EigenError;
use crate::jahnteller::JtError;
use crate::ringspectrum::RingError;

/// Umbrella error for pipelines that cross module boundaries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    JahnTeller(#[from] JtError),
    #[error(transparent)]
    ConicalSearch(#[from] CiError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Comoving(#[from] ComovingError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
