//! Elliptic curves over Q with exact integer arithmetic.

mod minimal;
mod model;
mod points;
mod record;
mod tate;
mod twist;

pub use minimal::{minimal_model, minimal_model_with, MinimalModel};
pub use model::{model_invariants, Invariants, Isomorphism, WeierstrassModel};
pub use points::{a_p, BSGS_LIMIT, NAIVE_LIMIT};
pub use record::{conductor, CurveRecord, Provenance, Sourced};
pub use tate::{tate_local, Kodaira, LocalReduction, ReductionKind};
pub use twist::{quadratic_twist, two_torsion_rank};

use thiserror::Error;

use crate::arith::ArithError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EcqError {
    #[error("singular Weierstrass model (discriminant 0)")]
    SingularModel,
    #[error("model is not minimal at {0}")]
    NotMinimal(String),
    #[error("coordinate change does not give an integral model")]
    NonIntegral,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("p = {0} exceeds the point-counting budget")]
    PointCountBudget(u64),
    #[error("group order at p = {0} not determined")]
    AmbiguousGroupOrder(u64),
    #[error("Manin constant must be a positive integer, got {0}")]
    InvalidManin(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
