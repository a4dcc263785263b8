//! Lower bounds for `v2(m_{E^(D)})`, upper bounds for `rank E^(D)(Q)`, the
//! ω(D) threshold, and per-twist certificates.
//!
//! For a curve `E` of conductor `N` with a rational 2-torsion point that is
//! minimal among its quadratic twists, and a fundamental discriminant `D`
//! with `N | N^(D)`:
//!
//! * `v2(m_{E^(D)}) >= v2(m_E / c_E^2) - 4 + Σ_p v2((p-1)(p+1-a_p)(p+1+a_p))`,
//!   the sum over primes `p | D` with `p ∤ 2N`;
//! * `rank E^(D)(Q) <= 2 ω(N^(D)) - 1 <= 2 (ω(D) + ω(N)) - 1`.
//!
//! When the rank bound does not exceed the valuation bound, Watkins'
//! conjecture holds for `E^(D)`. This is automatic once
//! `ω(D) >= 6 + 5 ω(N) - v2(m_E / c_E^2)`.

mod bounds;
mod certificate;
mod density;
mod minimal_twist;
mod threshold;

pub use bounds::{
    coarse_rank_upper, faltings_delta_v2, local_v2_contribution, lower_bound_torsion, moddeg_v2_lower_exact, moddeg_v2_lower_torsion, petersson_v2_lower,
    prime_contributions, selmer_rank_upper, twist_prime_set, twist_rank_upper, PrimeContribution,
};
pub use certificate::{verify_twist, CertifiedBy, InapplicableReason, TwistCertificate, Verdict, Verifier};
pub use density::{count_omega_at_most, count_omega_at_most_with_limit, density_ratio, OMEGA_COUNT_LIMIT};
pub use minimal_twist::{is_minimal_twist, minimal_twist_candidates, twist_record};
pub use threshold::{
    kappa, kappa_from_threshold, modular_inputs, threshold_value, watkins_threshold, Assumption, ManinPolicy,
    ModularInputs, ThresholdReport, KAPPA_RULE,
};

use thiserror::Error;

use crate::arith::ArithError;
use crate::ecq::EcqError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WatkinsError {
    #[error("a_{p} = {a_p} violates the Hasse bound")]
    HasseViolation { p: u64, a_p: i64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("prime {0} is too large for point counting")]
    PrimeTooLarge(String),
    #[error("curves have different j-invariants, so are not quadratic twists")]
    NotTwistPair,
    #[error("missing {0}")]
    MissingInvariant(&'static str),
    #[error("E(Q)[2] is trivial")]
    NoTwoTorsion,
    #[error("x = {x} exceeds the enumeration limit {limit}")]
    BudgetExceeded { x: u64, limit: u64 },
    #[error(transparent)]
    Ecq(#[from] EcqError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
