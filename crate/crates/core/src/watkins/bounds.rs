//! 2-adic lower bounds for modular degrees of twists and upper bounds for
//! their ranks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::arith::{FundamentalDiscriminant, Factorization};
use crate::ecq::{a_p, CurveRecord};

use super::threshold::{modular_inputs, ManinPolicy};
use super::WatkinsError;

/// One prime of the twist prime set with its trace and 2-adic contribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeContribution {
    pub p: u64,
    pub a_p: i64,
    pub contribution_v2: u32,
}

/// Primes dividing `d` but not `2n`, increasing.
pub fn twist_prime_set(d_fact: &Factorization, n_fact: &Factorization) -> Vec<BigInt> {
    let two = BigInt::from(2);
    let mut out: Vec<BigInt> = d_fact
        .primes()
        .filter(|p| **p != two && !n_fact.divides_prime(p))
        .cloned()
        .collect();
    out.sort();
    out
}

/// `v2((p-1)(p+1-ap)(p+1+ap))` for an odd prime `p`.
pub fn local_v2_contribution(p: u64, ap: i64) -> Result<u32, WatkinsError> {
    if p.is_multiple_of(2) || p < 3 {
        return Err(WatkinsError::NotOddPrime(p));
    }
    let (p, ap) = (p as i128, ap as i128);
    if ap * ap > 4 * p {
        return Err(WatkinsError::HasseViolation { p: p as u64, a_p: ap as i64 });
    }
    // All three factors are nonzero because |ap| <= 2 sqrt(p) < p + 1.
    Ok([p - 1, p + 1 - ap, p + 1 + ap].iter().map(|f| f.trailing_zeros()).sum())
}

/// Traces and contributions over `twist_prime_set(d, N)`.
pub fn prime_contributions(curve: &CurveRecord, d: &FundamentalDiscriminant) -> Result<Vec<PrimeContribution>, WatkinsError> {
    twist_prime_set(d.factorization(), &curve.conductor)
        .iter()
        .map(|p| {
            let p = p.to_u64().ok_or_else(|| WatkinsError::PrimeTooLarge(p.to_string()))?;
            let ap = a_p(&curve.minimal_model, p)?;
            Ok(PrimeContribution {
                p,
                a_p: ap,
                contribution_v2: local_v2_contribution(p, ap)?,
            })
        })
        .collect()
}

fn contribution_sum(primes: &[PrimeContribution]) -> i64 {
    primes.iter().map(|c| c.contribution_v2 as i64).sum()
}

/// Lower bound for `v2(|f_{E^(D)}|^2 / |f_E|^2)`: the contribution sum minus one.
pub fn petersson_v2_lower(curve: &CurveRecord, d: &FundamentalDiscriminant) -> Result<i64, WatkinsError> {
    Ok(contribution_sum(&prime_contributions(curve, d)?) - 1)
}

/// `v2(m_E / c_E^2) - 4 + Σ contributions`, a lower bound for
/// `v2(m_{E^(D)})` when `E` is minimal among its twists.
pub fn moddeg_v2_lower_exact(curve: &CurveRecord, d: &FundamentalDiscriminant, policy: ManinPolicy) -> Result<i64, WatkinsError> {
    let inputs = modular_inputs(curve, policy)?;
    let primes = prime_contributions(curve, d)?;
    Ok(lower_bound_exact(inputs.v2_ratio(), &primes))
}

pub(crate) fn lower_bound_exact(v2_ratio: i64, primes: &[PrimeContribution]) -> i64 {
    v2_ratio - 4 + contribution_sum(primes)
}

/// `3 ω(D) + v2(m_E / c_E^2) - 7 - 3 ω(N)`; requires rational 2-torsion.
pub fn moddeg_v2_lower_torsion(curve: &CurveRecord, d: &FundamentalDiscriminant, policy: ManinPolicy) -> Result<i64, WatkinsError> {
    if curve.two_torsion_rank == 0 {
        return Err(WatkinsError::NoTwoTorsion);
    }
    let inputs = modular_inputs(curve, policy)?;
    Ok(lower_bound_torsion(d.omega(), inputs.v2_ratio(), curve.conductor.omega()))
}

/// The torsion bound from its integer inputs.
pub fn lower_bound_torsion(omega_d: usize, v2_ratio: i64, omega_n: usize) -> i64 {
    3 * omega_d as i64 + v2_ratio - 7 - 3 * omega_n as i64
}

/// `2 ω(N) - 1`, the rank bound for a curve with rational 2-torsion.
pub fn selmer_rank_upper(n_fact: &Factorization) -> i64 {
    2 * n_fact.omega() as i64 - 1
}

/// `(2 ω(N^(D)) - 1, 2 (ω(D) + ω(N)) - 1)`.
pub fn twist_rank_upper(
    curve: &CurveRecord,
    d: &FundamentalDiscriminant,
    twist_conductor: &Factorization,
) -> Result<(i64, i64), WatkinsError> {
    if curve.two_torsion_rank == 0 {
        return Err(WatkinsError::NoTwoTorsion);
    }
    let exact = selmer_rank_upper(twist_conductor);
    Ok((exact, coarse_rank_upper(d.omega(), curve.conductor.omega())))
}

/// `2 (ω(D) + ω(N)) - 1`.
pub fn coarse_rank_upper(omega_d: usize, omega_n: usize) -> i64 {
    2 * (omega_d + omega_n) as i64 - 1
}

/// `v2(δ(E1, E2)) = (v2(Δ1) - v2(Δ2)) / 6` for twists `E1`, `E2`, with the
/// check `|v2(δ)| <= 3`.
pub fn faltings_delta_v2(e1: &CurveRecord, e2: &CurveRecord) -> Result<(BigRational, bool), WatkinsError> {
    if e1.minimal_model.j() != e2.minimal_model.j() {
        return Err(WatkinsError::NotTwistPair);
    }
    let two = BigInt::from(2);
    let diff = e1.min_disc.exponent(&two) as i64 - e2.min_disc.exponent(&two) as i64;
    let delta = BigRational::new(diff.into(), 6.into());
    let ok = delta.abs() <= BigRational::from_integer(3.into());
    Ok((delta, ok))
}

/// `n` or `n/d` in lowest terms.
pub(crate) fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
