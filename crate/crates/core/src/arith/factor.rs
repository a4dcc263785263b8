use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::prime::{primality, small_primes, Primality, TRIAL_DIVISION_BOUND};
use super::ArithError;

/// How far [`factorize_with`] is allowed to go before giving up.
#[derive(Clone, Debug)]
pub struct FactorBudget {
    /// Trial division runs over all primes up to this bound.
    pub trial_bound: u64,
    /// Independent Pollard-Brent attempts per composite cofactor.
    pub rho_rounds: u32,
    /// Iterations per attempt.
    pub rho_iterations: u64,
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        Self {
            trial_bound: TRIAL_DIVISION_BOUND,
            rho_rounds: 12,
            rho_iterations: 1 << 21,
            seed: 0x5741_544b_494e_5321,
        }
    }
}

/// Whether every prime of a factorization carries a primality proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trust {
    Proven,
    Probabilistic,
}

/// A nonzero integer together with its prime factorization.
///
/// Primes are strictly increasing and exponents are at least one; the sign
/// times the product of prime powers reproduces `value` exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    value: BigInt,
    factors: Vec<(BigInt, u32)>,
    trust: Trust,
}

impl Factorization {
    /// Builds a factorization from parts, checking every invariant.
    pub fn from_parts(value: BigInt, factors: Vec<(BigInt, u32)>) -> Result<Self, ArithError> {
        if value.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let mut product = BigInt::one();
        let mut trust = Trust::Proven;
        let mut prev: Option<&BigInt> = None;
        for (p, e) in &factors {
            if *e == 0 || prev.is_some_and(|q| q >= p) || !p.is_positive() {
                return Err(ArithError::InvalidFactorization(value.to_string()));
            }
            match primality(p.magnitude()) {
                Primality::Composite => {
                    return Err(ArithError::InvalidFactorization(value.to_string()))
                }
                Primality::ProbablePrime => trust = Trust::Probabilistic,
                Primality::Prime => {}
            }
            product *= num_traits::pow(p.clone(), *e as usize);
            prev = Some(p);
        }
        if product != value.abs() {
            return Err(ArithError::InvalidFactorization(value.to_string()));
        }
        Ok(Self {
            value,
            factors,
            trust,
        })
    }

    pub(crate) fn from_map(negative: bool, map: BTreeMap<BigUint, u32>, trust: Trust) -> Self {
        let mut value = BigInt::one();
        let factors: Vec<(BigInt, u32)> = map
            .into_iter()
            .map(|(p, e)| (BigInt::from_biguint(Sign::Plus, p), e))
            .collect();
        for (p, e) in &factors {
            value *= num_traits::pow(p.clone(), *e as usize);
        }
        if negative {
            value = -value;
        }
        Self {
            value,
            factors,
            trust,
        }
    }

    pub fn one() -> Self {
        Self {
            value: BigInt::one(),
            factors: Vec::new(),
            trust: Trust::Proven,
        }
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    /// `+1` or `-1`.
    pub fn sign(&self) -> i8 {
        if self.value.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn factors(&self) -> &[(BigInt, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> + '_ {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn trust(&self) -> Trust {
        self.trust
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Exponent of `p` (zero when `p` does not divide).
    pub fn exponent(&self, p: &BigInt) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn divides_prime(&self, p: &BigInt) -> bool {
        self.exponent(p) > 0
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    /// Factorization of the absolute value.
    pub fn abs(&self) -> Self {
        Self {
            value: self.value.abs(),
            factors: self.factors.clone(),
            trust: self.trust,
        }
    }

    /// Factorization of `-self`.
    pub fn negated(&self) -> Self {
        Self {
            value: -&self.value,
            factors: self.factors.clone(),
            trust: self.trust,
        }
    }

    /// Product of two factorizations.
    pub fn mul(&self, other: &Self) -> Self {
        let mut map: BTreeMap<BigUint, u32> = BTreeMap::new();
        for (p, e) in self.factors.iter().chain(other.factors.iter()) {
            *map.entry(p.magnitude().clone()).or_insert(0) += e;
        }
        let negative = self.value.is_negative() != other.value.is_negative();
        Self::from_map(negative, map, self.trust.max(other.trust))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "{}", self.value);
        }
        if self.value.is_negative() {
            write!(f, "-")?;
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Factor `n` with the default budget.
pub fn factorize(n: &BigInt) -> Result<Factorization, ArithError> {
    factorize_with(n, &FactorBudget::default(), &[])
}

/// Factor `n`, first dividing out any `hints` (candidate primes the caller
/// already knows about), then trial division, then Pollard-Brent rho.
pub fn factorize_with(
    n: &BigInt,
    budget: &FactorBudget,
    hints: &[BigInt],
) -> Result<Factorization, ArithError> {
    if n.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    let negative = n.is_negative();
    let mut m = n.magnitude().clone();
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut trust = Trust::Proven;

    for hint in hints {
        let h = hint.magnitude();
        if h <= &BigUint::one() || found.contains_key(h) || !(&m % h).is_zero() {
            continue;
        }
        match primality(h) {
            Primality::Composite => continue,
            Primality::ProbablePrime => trust = Trust::Probabilistic,
            Primality::Prime => {}
        }
        let e = strip(&mut m, h);
        found.insert(h.clone(), e);
    }

    let mut trial_complete_to = 1u64;
    for &p in small_primes() {
        let p = p as u64;
        if p > budget.trial_bound || m.is_one() {
            break;
        }
        if m.bits() < 128 {
            let small = m.to_u128().unwrap();
            if (p as u128) * (p as u128) > small {
                break;
            }
            if small.is_multiple_of(p as u128) {
                let pb = BigUint::from(p);
                let e = strip(&mut m, &pb);
                *found.entry(pb).or_insert(0) += e;
            }
        } else if (&m % p).is_zero() {
            let pb = BigUint::from(p);
            let e = strip(&mut m, &pb);
            *found.entry(pb).or_insert(0) += e;
        }
        trial_complete_to = p;
    }

    if !m.is_one() {
        // No prime <= trial_complete_to divides m.
        let limit = BigUint::from(trial_complete_to + 1);
        if m < &limit * &limit {
            *found.entry(m.clone()).or_insert(0) += 1;
        } else {
            let mut stack = vec![m];
            let mut salt = 0u64;
            while let Some(c) = stack.pop() {
                match primality(&c) {
                    Primality::Prime => *found.entry(c).or_insert(0) += 1,
                    Primality::ProbablePrime => {
                        trust = Trust::Probabilistic;
                        *found.entry(c).or_insert(0) += 1;
                    }
                    Primality::Composite => {
                        if let Some(root) = perfect_power_root(&c) {
                            // c = root^k; push k copies.
                            let mut rest = c.clone();
                            while (&rest % &root).is_zero() {
                                rest /= &root;
                                stack.push(root.clone());
                            }
                            continue;
                        }
                        salt += 1;
                        let d = pollard_brent(&c, budget, salt).ok_or_else(|| {
                            ArithError::FactoringBudgetExceeded {
                                n: n.to_string(),
                                cofactor: c.to_string(),
                            }
                        })?;
                        let other = &c / &d;
                        stack.push(d);
                        stack.push(other);
                    }
                }
            }
        }
    }

    Ok(Factorization::from_map(negative, found, trust))
}

fn strip(m: &mut BigUint, p: &BigUint) -> u32 {
    let mut e = 0;
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return e;
        }
        *m = q;
        e += 1;
    }
}

/// Returns `r` when `c = r^k` for some `k >= 2`. Rho cycles on squares
/// of primes are slow, so these are split off first.
fn perfect_power_root(c: &BigUint) -> Option<BigUint> {
    let bits = c.bits() as u32;
    for k in 2..=bits.max(2) {
        let r = c.nth_root(k);
        if r <= BigUint::one() {
            break;
        }
        if num_traits::pow(r.clone(), k as usize) == *c {
            return Some(r);
        }
    }
    None
}

/// Brent's cycle-finding variant of Pollard rho. Returns a nontrivial
/// divisor or `None` once the budget is spent.
fn pollard_brent(n: &BigUint, budget: &FactorBudget, salt: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let below = |rng: &mut ChaCha8Rng| {
        let mut bytes = vec![0u8; (n.bits() as usize).div_ceil(8) + 8];
        rng.fill(&mut bytes[..]);
        BigUint::from_bytes_le(&bytes) % n
    };
    const BATCH: u64 = 128;
    for _ in 0..budget.rho_rounds {
        let c = below(&mut rng) | BigUint::one();
        let mut y = below(&mut rng);
        let f = |v: &BigUint| (v * v + &c) % n;
        let mut g = BigUint::one();
        let mut q = BigUint::one();
        let mut r = 1u64;
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut spent = 0u64;
        while g.is_one() && spent < budget.rho_iterations {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += steps;
                spent += steps;
            }
            r *= 2;
        }
        if g == *n {
            // Batch overshot; retrace one step at a time.
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && g != *n {
            return Some(g);
        }
    }
    None
}

/// 2-adic valuation of a nonzero integer.
pub fn v2(n: &BigInt) -> Result<u64, ArithError> {
    n.trailing_zeros().ok_or(ArithError::ZeroInput)
}

/// 2-adic valuation of `num / den`; the pair need not be reduced.
pub fn v2_ratio(num: &BigInt, den: &BigInt) -> Result<i64, ArithError> {
    Ok(v2(num)? as i64 - v2(den)? as i64)
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> Result<u64, ArithError> {
    if n.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    if p == &BigInt::from(2) {
        return v2(n);
    }
    let mut m = n.magnitude().clone();
    Ok(strip(&mut m, p.magnitude()) as u64)
}
