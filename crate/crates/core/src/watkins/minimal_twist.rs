//! Whether a curve has the smallest conductor among its quadratic twists.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::arith::{prime_discriminant, Factorization, FundamentalDiscriminant};
use crate::ecq::{quadratic_twist, CurveRecord};

use super::WatkinsError;

/// The curve data of `E^(D)`, computed from a re-minimalized model.
pub fn twist_record(curve: &CurveRecord, d: &FundamentalDiscriminant) -> Result<CurveRecord, WatkinsError> {
    let model = quadratic_twist(&curve.minimal_model, d);
    let mut hints = curve.known_primes();
    hints.extend(d.factorization().primes().cloned());
    hints.push(BigInt::from(2));
    hints.push(BigInt::from(3));
    Ok(CurveRecord::from_model_with(&model, &hints)?)
}

/// Orders discriminants by `|D|`, positive first.
pub(crate) fn canonical_key(d: &BigInt) -> (BigInt, bool) {
    (d.abs(), d.is_negative())
}

/// Nontrivial fundamental discriminants supported on the primes of `2N`:
/// products of `p*` for odd `p | N` with one of `1, -4, 8, -8`.
/// There are `4 · 2^k - 1` of them, `k` the number of odd primes of `N`.
pub fn minimal_twist_candidates(n_fact: &Factorization) -> Vec<FundamentalDiscriminant> {
    let two = BigInt::from(2);
    let odd: Vec<BigInt> = n_fact.primes().filter(|p| **p != two).cloned().collect();
    let two_parts: [(i64, u32); 4] = [(1, 0), (-4, 2), (8, 3), (-8, 3)];
    let mut out = Vec::with_capacity((4usize << odd.len()) - 1);
    for mask in 0u64..(1u64 << odd.len()) {
        for &(two_part, e2) in &two_parts {
            let mut value = BigInt::from(two_part);
            let mut factors = Vec::new();
            if e2 > 0 {
                factors.push((two.clone(), e2));
            }
            for (i, p) in odd.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    value *= prime_discriminant(p);
                    factors.push((p.clone(), 1));
                }
            }
            if value.is_one() {
                continue;
            }
            let fact = Factorization::from_parts(value, factors).expect("product of listed primes");
            out.push(FundamentalDiscriminant::from_factorization(fact).expect("product of prime discriminants"));
        }
    }
    out.sort_by_key(|d| canonical_key(d.value()));
    out
}

/// `(true, None)` when no twist has smaller conductor; otherwise `false` and
/// the discriminant of a twist of least conductor (first in canonical order
/// among ties).
pub fn is_minimal_twist(curve: &CurveRecord) -> Result<(bool, Option<FundamentalDiscriminant>), WatkinsError> {
    let n = curve.conductor.value();
    let mut best: Option<(BigInt, FundamentalDiscriminant)> = None;
    for d in minimal_twist_candidates(&curve.conductor) {
        let twisted = twist_record(curve, &d)?;
        let m = twisted.conductor.value();
        if m < n && best.as_ref().is_none_or(|(b, _)| m < b) {
            best = Some((m.clone(), d));
        }
    }
    Ok(match best {
        None => (true, None),
        Some((_, d)) => (false, Some(d)),
    })
}

/// `N | N^(D)`.
pub(crate) fn conductor_divides(n: &Factorization, twist: &Factorization) -> bool {
    twist.value().is_multiple_of(n.value())
}
