use thiserror::Error;

use crate::cheeger::CheegerError;
use crate::entire::EntireError;
use crate::gabor::GaborError;
use crate::grid::{FormatError, GridError};
use crate::stability::StabilityError;

/// Any error produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Gabor(#[from] GaborError),
    #[error(transparent)]
    Entire(#[from] EntireError),
    #[error(transparent)]
    Cheeger(#[from] CheegerError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
