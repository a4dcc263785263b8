//! Prime sieves and Miller-Rabin primality.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Upper limit for trial division in [`super::factorize`].
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// First twelve primes. As Miller-Rabin bases they are a deterministic
/// witness set for every 64-bit integer.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Extra random bases used above 64 bits.
const PROBABILISTIC_ROUNDS: usize = 24;

/// Outcome of a primality test on an arbitrary-precision integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primality {
    Composite,
    /// Proven by the deterministic 64-bit base set.
    Prime,
    /// Passed Miller-Rabin with random bases; not proven.
    ProbablePrime,
}

/// Sieve of Eratosthenes, all primes `<= n`.
pub fn primes_up_to(n: usize) -> Vec<u32> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(n / 10 + 16);
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes up to [`TRIAL_DIVISION_BOUND`], computed once.
pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_DIVISION_BOUND as usize))
}

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0).
pub(crate) fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] != 0 {
            continue;
        }
        spf[i] = i as u32;
        let mut j = i.saturating_mul(i);
        while j <= n {
            if spf[j] == 0 {
                spf[j] = i as u32;
            }
            j += i;
        }
    }
    spf
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn is_strong_probable_prime(n: &BigUint, a: &BigUint, d: &BigUint, s: u64) -> bool {
    let n_minus_1 = n - 1u32;
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Primality of an arbitrary-precision integer.
///
/// Values below 2^64 get a proof; larger values get the fixed base set plus
/// [`PROBABILISTIC_ROUNDS`] seeded random bases and are reported as
/// [`Primality::ProbablePrime`].
pub fn primality(n: &BigUint) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    if n.is_even() {
        return Primality::Composite;
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    for &a in &MR_BASES {
        if !is_strong_probable_prime(n, &BigUint::from(a), &d, s) {
            return Primality::Composite;
        }
    }
    // Seed from the low bits of n so the answer is reproducible.
    let seed = (n % BigUint::from(u64::MAX)).to_u64().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = &n_minus_1 - 3u32;
    for _ in 0..PROBABILISTIC_ROUNDS {
        let mut bytes = vec![0u8; (n.bits() as usize).div_ceil(8) + 8];
        rng.fill(&mut bytes[..]);
        let a = BigUint::from_bytes_le(&bytes) % &span + 2u32;
        if !is_strong_probable_prime(n, &a, &d, s) {
            return Primality::Composite;
        }
    }
    Primality::ProbablePrime
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn sieve_matches_naive() {
        let sieved = primes_up_to(2000);
        let naive: Vec<u32> = (0..=2000u32).filter(|&n| naive_is_prime(n as u64)).collect();
        assert_eq!(sieved, naive);
        assert_eq!(small_primes().len(), 78_498);
    }

    #[test]
    fn miller_rabin_small_range() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), naive_is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // Strong pseudoprimes to several small bases.
        for n in [2_047u64, 1_373_653, 25_326_001, 3_215_031_751, 3_825_123_056_546_413_051] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest 64-bit prime
    }

    #[test]
    fn big_primality() {
        // 2^89 - 1 is a Mersenne prime, 2^67 - 1 is not.
        let m89 = (BigUint::one() << 89u32) - 1u32;
        let m67 = (BigUint::one() << 67u32) - 1u32;
        assert_eq!(primality(&m89), Primality::ProbablePrime);
        assert_eq!(primality(&m67), Primality::Composite);
        assert_eq!(primality(&BigUint::from(97u32)), Primality::Prime);
    }

    #[test]
    fn spf_table() {
        let spf = smallest_prime_factors(100);
        assert_eq!(spf[97], 97);
        assert_eq!(spf[91], 7);
        assert_eq!(spf[64], 2);
    }
}
