use thiserror::Error;

use crate::cocycle::CocycleError;
use crate::symbolic::SymbolicError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("t grid must reach t ≥ 100 for the slope at infinity (t_max = {t_max})")]
    GridTooShort { t_max: f64 },
    #[error("grid is not uniform")]
    NonUniformGrid,
    #[error("Bernoulli measures are only invariant on the full shift")]
    UnsupportedSft,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
