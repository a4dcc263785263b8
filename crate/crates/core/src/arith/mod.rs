//! Exact integer arithmetic: factorization, ω, 2-adic valuations and
//! fundamental discriminants.

mod discriminant;
mod factor;
mod prime;

pub use discriminant::{
    enumerate_fundamental_discriminants, is_fundamental_discriminant, prime_discriminant,
    FundamentalDiscriminant, FundamentalDiscriminants, SignFilter,
};
pub use factor::{factorize, factorize_with, v2, v2_ratio, valuation, FactorBudget, Factorization, Trust};
pub use prime::{is_prime_u64, primality, primes_up_to, Primality, TRIAL_DIVISION_BOUND};

pub(crate) use prime::{mul_mod, pow_mod};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero input")]
    ZeroInput,
    #[error("could not factor {n} within budget (composite cofactor {cofactor} remains)")]
    FactoringBudgetExceeded { n: String, cofactor: String },
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(String),
    #[error("inconsistent factorization of {0}")]
    InvalidFactorization(String),
}

/// Number of distinct prime factors.
pub fn omega(f: &Factorization) -> usize {
    f.omega()
}
