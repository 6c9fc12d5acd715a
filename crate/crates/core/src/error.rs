use crate::kernel::rational::{fmt_q, fmt_vec, Vector, Q};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("feasible region is empty")]
    InfeasibleInput,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("ball is not full-dimensional")]
    DegenerateBall,
    #[error("facet description does not bound a ball")]
    UnboundedBall,
    #[error("dimension {got} exceeds the cap of {cap}")]
    DimensionTooLarge { got: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no unique direction")]
    ZeroVector,
    #[error("map is not isometric, witness {}", fmt_vec(.0))]
    NotIsometric(Vector),
    #[error("tolerance condition fails at r = {}", fmt_vec(.0))]
    ConditionViolated(Vector),
    #[error("tolerance {} is positive but below 2^-20", fmt_q(.0))]
    SmallToleranceCapped(Q),
    #[error("map does not restrict to the identity on the base")]
    NotExtendingIdentity,
    #[error("types live over different bases or arities")]
    BaseMismatch,
    #[error("expected {expected} variables, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("not a Katetov function: {0}")]
    NotKatetov(String),
    #[error("region is empty")]
    EmptyRegion,
    #[error("vectors do not form a basis")]
    NotABasis,
    #[error("realization falls within {} of forbidden type #{index}", fmt_q(.radius))]
    AvoidanceViolation { index: usize, radius: Q },
    #[error("no anchors found on the search grid")]
    NoAnchorsFound,
    #[error("grid would have {0} points, above the cap")]
    GridTooLarge(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<crate::kernel::lp::LpError> for Error {
    fn from(e: crate::kernel::lp::LpError) -> Self {
        match e {
            crate::kernel::lp::LpError::Infeasible => Error::InfeasibleInput,
            crate::kernel::lp::LpError::Unbounded => Error::Unbounded,
        }
    }
}
