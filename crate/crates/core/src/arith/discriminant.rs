//! Fundamental discriminants and their enumeration.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::factor::{factorize, Factorization, Trust};
use super::prime::smallest_prime_factors;
use super::ArithError;

/// Enumeration switches from a sieve to per-value factoring above this.
const SIEVE_LIMIT: u64 = 20_000_000;

/// Discriminant of a quadratic field (or `1`, the trivial character).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FundamentalDiscriminant {
    fact: Factorization,
}

impl FundamentalDiscriminant {
    pub fn new(d: &BigInt) -> Result<Self, ArithError> {
        let fact = factorize(d)?;
        Self::from_factorization(fact)
    }

    pub fn from_i64(d: i64) -> Result<Self, ArithError> {
        Self::new(&BigInt::from(d))
    }

    pub fn from_factorization(fact: Factorization) -> Result<Self, ArithError> {
        if is_fundamental_factored(&fact) {
            Ok(Self { fact })
        } else {
            Err(ArithError::NotFundamental(fact.value().to_string()))
        }
    }

    pub fn value(&self) -> &BigInt {
        self.fact.value()
    }

    pub fn factorization(&self) -> &Factorization {
        &self.fact
    }

    pub fn omega(&self) -> usize {
        self.fact.omega()
    }

    pub fn is_trivial(&self) -> bool {
        self.fact.value().is_one()
    }

    /// Decomposition into prime discriminants: `p*` = ±p with `p* ≡ 1 mod 4`
    /// for odd `p`, and one of `-4, 8, -8` for the 2-part.
    pub fn prime_discriminants(&self) -> Vec<BigInt> {
        let mut out = Vec::with_capacity(self.omega());
        let mut odd_product = BigInt::one();
        for p in self.fact.primes() {
            if p == &BigInt::from(2) {
                continue;
            }
            let star = prime_discriminant(p);
            odd_product *= &star;
            out.push(star);
        }
        let two_part = self.value() / odd_product;
        if !two_part.is_one() {
            out.insert(0, two_part);
        }
        out
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// `p*` for an odd prime `p`.
pub fn prime_discriminant(p: &BigInt) -> BigInt {
    if p.mod_floor(&BigInt::from(4)) == BigInt::one() {
        p.clone()
    } else {
        -p
    }
}

/// Fundamental-discriminant predicate read off a factorization.
pub(crate) fn is_fundamental_factored(f: &Factorization) -> bool {
    let d = f.value();
    if d.is_one() {
        return true;
    }
    let two = BigInt::from(2);
    let odd_squarefree = f.factors().iter().all(|(p, e)| p == &two || *e == 1);
    match d.mod_floor(&BigInt::from(4)).to_u8() {
        Some(1) => f.is_squarefree(),
        Some(0) => {
            // d = 4m with m ≡ 3 (e2 = 2) or m ≡ 2 (e2 = 3) mod 4.
            let m: BigInt = d / 4;
            match (f.exponent(&two), m.mod_floor(&BigInt::from(4)).to_u8()) {
                (2, Some(3)) | (3, Some(2)) => odd_squarefree,
                _ => false,
            }
        }
        _ => false,
    }
}

/// True iff `d` is `1` or the discriminant of a quadratic field.
pub fn is_fundamental_discriminant(d: &BigInt) -> Result<bool, ArithError> {
    let r = d.mod_floor(&BigInt::from(4));
    if r == BigInt::from(2) || r == BigInt::from(3) {
        return Ok(false);
    }
    Ok(is_fundamental_factored(&factorize(d)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignFilter {
    #[default]
    Both,
    Positive,
    Negative,
}

impl SignFilter {
    fn admits(self, negative: bool) -> bool {
        match self {
            SignFilter::Both => true,
            SignFilter::Positive => !negative,
            SignFilter::Negative => negative,
        }
    }
}

/// Iterator over fundamental discriminants `d ≠ 1` with `|d| <= bound` and
/// `ω(d) >= min_omega`, by increasing `|d|`, positive first at ties.
pub struct FundamentalDiscriminants {
    bound: u64,
    min_omega: usize,
    sign: SignFilter,
    next_abs: u64,
    pending_negative: Option<FundamentalDiscriminant>,
    spf: Option<Vec<u32>>,
}

pub fn enumerate_fundamental_discriminants(
    bound: u64,
    min_omega: usize,
    sign: SignFilter,
) -> FundamentalDiscriminants {
    let spf = (bound <= SIEVE_LIMIT).then(|| smallest_prime_factors(bound as usize));
    FundamentalDiscriminants {
        bound,
        min_omega,
        sign,
        next_abs: 2,
        pending_negative: None,
        spf,
    }
}

impl FundamentalDiscriminants {
    fn factor_abs(&self, n: u64) -> Factorization {
        match &self.spf {
            Some(spf) => {
                let mut map = BTreeMap::new();
                let mut m = n as usize;
                while m > 1 {
                    let p = spf[m] as usize;
                    *map.entry(BigUint::from(p as u64)).or_insert(0u32) += 1;
                    m /= p;
                }
                Factorization::from_map(false, map, Trust::Proven)
            }
            None => factorize(&BigInt::from(n)).expect("64-bit values factor within budget"),
        }
    }
}

impl Iterator for FundamentalDiscriminants {
    type Item = FundamentalDiscriminant;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(neg) = self.pending_negative.take() {
            return Some(neg);
        }
        while self.next_abs <= self.bound {
            let n = self.next_abs;
            self.next_abs += 1;
            // Residues mod 4 of n and -n decide which signs can qualify.
            let pos_ok = matches!(n % 4, 0 | 1) && self.sign.admits(false);
            let neg_ok = matches!(n % 4, 0 | 3) && self.sign.admits(true);
            if !pos_ok && !neg_ok {
                continue;
            }
            let fact = self.factor_abs(n);
            if fact.omega() < self.min_omega {
                continue;
            }
            let pos = pos_ok
                .then(|| FundamentalDiscriminant::from_factorization(fact.clone()).ok())
                .flatten();
            let neg = neg_ok
                .then(|| FundamentalDiscriminant::from_factorization(fact.negated()).ok())
                .flatten();
            match (pos, neg) {
                (Some(p), n) => {
                    self.pending_negative = n;
                    return Some(p);
                }
                (None, Some(n)) => return Some(n),
                (None, None) => {}
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(it: FundamentalDiscriminants) -> Vec<i64> {
        it.map(|d| d.value().to_i64().unwrap()).collect()
    }

    // Independent brute-force predicate: squarefree check by trial division.
    fn brute_is_fundamental(d: i64) -> bool {
        let squarefree = |m: i64| {
            let m = m.abs();
            (2..).take_while(|k| k * k <= m).all(|k| m % (k * k) != 0)
        };
        if d == 1 {
            return true;
        }
        match d.rem_euclid(4) {
            1 => squarefree(d),
            0 => matches!((d / 4).rem_euclid(4), 2 | 3) && squarefree(d / 4),
            _ => false,
        }
    }

    #[test]
    fn predicate_examples() {
        for (d, want) in [(5, true), (12, true), (9, false), (1, true), (-3, true), (-4, true), (8, true), (-8, true), (7, false), (-1, false), (16, false), (-20, true), (24, true), (28, true), (32, false)] {
            assert_eq!(is_fundamental_discriminant(&BigInt::from(d)).unwrap(), want, "d = {d}");
        }
        // Real quadratic field discriminants below 50.
        let real: Vec<i64> = (2..50).filter(|&d| brute_is_fundamental(d)).collect();
        assert_eq!(real, vec![5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 37, 40, 41, 44]);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(values(enumerate_fundamental_discriminants(8, 0, SignFilter::Both)), vec![-3, -4, 5, -7, 8, -8]);
        assert!(values(enumerate_fundamental_discriminants(4, 2, SignFilter::Both)).is_empty());
        let pos = values(enumerate_fundamental_discriminants(100, 2, SignFilter::Positive));
        for d in [12, 21, 24] {
            assert!(pos.contains(&d));
        }
        assert!(pos.iter().all(|d| *d > 0));
        let neg = values(enumerate_fundamental_discriminants(100, 0, SignFilter::Negative));
        assert!(neg.iter().all(|d| *d < 0));
    }

    #[test]
    fn enumeration_matches_predicate_exhaustively() {
        let bound = 10_000i64;
        let mut expected = Vec::new();
        for n in 2..=bound {
            for d in [n, -n] {
                if brute_is_fundamental(d) {
                    expected.push(d);
                }
            }
        }
        assert_eq!(values(enumerate_fundamental_discriminants(bound as u64, 0, SignFilter::Both)), expected);

        let with_omega: Vec<i64> = expected
            .iter()
            .copied()
            .filter(|d| factorize(&BigInt::from(*d)).unwrap().omega() >= 3)
            .collect();
        assert_eq!(values(enumerate_fundamental_discriminants(bound as u64, 3, SignFilter::Both)), with_omega);
    }

    #[test]
    fn prime_discriminant_decomposition() {
        for d in enumerate_fundamental_discriminants(3_000, 0, SignFilter::Both) {
            let parts = d.prime_discriminants();
            assert_eq!(parts.len(), d.omega(), "d = {d}");
            let product: BigInt = parts.iter().product();
            assert_eq!(&product, d.value());
            for part in &parts {
                assert!(FundamentalDiscriminant::new(part).is_ok(), "{part} in {d}");
            }
        }
    }

    #[test]
    fn non_fundamental_rejected() {
        assert!(matches!(FundamentalDiscriminant::from_i64(7), Err(ArithError::NotFundamental(_))));
        assert!(FundamentalDiscriminant::from_i64(1).unwrap().is_trivial());
    }
}
