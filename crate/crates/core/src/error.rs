use thiserror::Error;

use crate::module::Flavor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The tables of a module are not total, not closed, or reference unknown IDs.
    #[error("malformed module: {0}")]
    Structural(String),

    #[error("carrier of {0} elements exceeds the cap of {cap}", cap = crate::module::MAX_CARRIER)]
    TooLarge(usize),

    #[error("flavor mismatch: {0:?} vs {1:?}")]
    FlavorMismatch(Flavor, Flavor),

    #[error("object mismatch: {0}")]
    ObjectMismatch(String),

    /// The induced relation failed one of the partial order laws; only possible
    /// for a module whose tables violate the axioms.
    #[error("induced relation is not a partial order: {0}")]
    NotAPartialOrder(String),

    #[error("partition is not a congruence: classes of ({0}, {1}) are not respected")]
    IncompatibleCongruence(usize, usize),

    #[error("map is not a homomorphism: {0}")]
    NotAHom(String),

    #[error("search budget of {0} exceeded")]
    BudgetExceeded(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("module is not free: {0}")]
    NotFree(String),

    #[error("not a splittable injection: {0}")]
    NotSplittable(String),

    #[error("{0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
