//! Traces of Frobenius by point counting over F_p.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{is_prime_u64, mul_mod, pow_mod};

use super::model::WeierstrassModel;
use super::EcqError;

/// Largest p counted by a full pass over F_p.
pub const NAIVE_LIMIT: u64 = 10_000;
/// Largest p handled at all (baby-step giant-step above [`NAIVE_LIMIT`]).
pub const BSGS_LIMIT: u64 = 100_000_000;

const POINTS_PER_CURVE: usize = 40;

fn reduce(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// `a_p = p + 1 - #E(F_p)` for a prime `p` of good reduction of `m`.
pub fn a_p(m: &WeierstrassModel, p: u64) -> Result<i64, EcqError> {
    if !is_prime_u64(p) {
        return Err(EcqError::NotPrime(p.to_string()));
    }
    if reduce(m.disc(), p) == 0 {
        return Err(EcqError::BadReduction(p));
    }
    if p > BSGS_LIMIT {
        return Err(EcqError::PointCountBudget(p));
    }
    if p == 2 {
        return Ok(3 - count_points_direct(m, 2) as i64);
    }
    if p <= NAIVE_LIMIT {
        return Ok(trace_by_residues(m, p));
    }
    trace_by_bsgs(m, p)
}

/// Enumerates all `(x, y)`; only used at p = 2.
fn count_points_direct(m: &WeierstrassModel, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = m.ainvs().clone().map(|c| reduce(&c, p));
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let lhs = (y * y + a1 * x * y + a3 * y) % p;
            let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// Odd p: `(2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`, so
/// `a_p = -Σ_x χ(4x^3 + b2 x^2 + 2 b4 x + b6)`.
fn trace_by_residues(m: &WeierstrassModel, p: u64) -> i64 {
    let inv = m.invariants();
    let b2 = reduce(&inv.b2, p);
    let b4 = reduce(&inv.b4, p);
    let b6 = reduce(&inv.b6, p);
    let mut is_square = vec![false; p as usize];
    for y in 1..p {
        is_square[(y * y % p) as usize] = true;
    }
    let mut sum = 0i64;
    for x in 0..p {
        let v = ((((4 * x + b2) % p) * x + 2 * b4) % p * x + b6) % p;
        if v != 0 {
            sum += if is_square[v as usize] { 1 } else { -1 };
        }
    }
    -sum
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pt {
    Inf,
    Aff(u64, u64),
}

/// `y^2 = x^3 + a x + b` over F_p, p >= 5.
struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

impl ShortCurve {
    fn inv(&self, x: u64) -> u64 {
        pow_mod(x, self.p - 2, self.p)
    }

    fn neg(&self, q: Pt) -> Pt {
        match q {
            Pt::Inf => Pt::Inf,
            Pt::Aff(x, y) => Pt::Aff(x, (self.p - y) % self.p),
        }
    }

    fn add(&self, u: Pt, v: Pt) -> Pt {
        let p = self.p;
        match (u, v) {
            (Pt::Inf, q) | (q, Pt::Inf) => q,
            (Pt::Aff(x1, y1), Pt::Aff(x2, y2)) => {
                let lambda = if x1 == x2 {
                    if (y1 + y2) % p == 0 {
                        return Pt::Inf;
                    }
                    let num = (3 * mul_mod(x1, x1, p) + self.a) % p;
                    mul_mod(num, self.inv(2 * y1 % p), p)
                } else {
                    let num = (y2 + p - y1) % p;
                    mul_mod(num, self.inv((x2 + p - x1) % p), p)
                };
                let x3 = (mul_mod(lambda, lambda, p) + 2 * p - x1 - x2) % p;
                let y3 = (mul_mod(lambda, (x1 + p - x3) % p, p) + p - y1) % p;
                Pt::Aff(x3, y3)
            }
        }
    }

    fn mul(&self, q: Pt, mut k: u64) -> Pt {
        let mut acc = Pt::Inf;
        let mut base = q;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(self.a, x, p) + self.b) % p
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Pt {
        loop {
            let x = rng.gen_range(0..self.p);
            let v = self.rhs(x);
            if v == 0 {
                return Pt::Aff(x, 0);
            }
            if let Some(y) = sqrt_mod(v, self.p) {
                return Pt::Aff(x, y);
            }
        }
    }

    /// Order of `q`, knowing it divides some integer in `[lo, hi]`.
    fn order_in_interval(&self, q: Pt, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo + 1;
        let m = width.isqrt() + 1;
        let mut baby = HashMap::with_capacity(m as usize);
        let mut cur = Pt::Inf;
        for j in 0..m {
            baby.entry(cur).or_insert(j);
            cur = self.add(cur, q);
        }
        let step = self.mul(q, m);
        let mut giant = self.mul(q, lo);
        let mut multiple = None;
        for i in 0..=m {
            if let Some(&j) = baby.get(&self.neg(giant)) {
                let n = lo + i * m + j;
                if n <= hi {
                    multiple = Some(n);
                    break;
                }
            }
            giant = self.add(giant, step);
        }
        let mut n = multiple?;
        for (prime, _) in factor_u64(n) {
            while n % prime == 0 && self.mul(q, n / prime) == Pt::Inf {
                n /= prime;
            }
        }
        Some(n)
    }

    /// `#E(F_p)` when random points pin down a unique multiple of their
    /// orders' lcm in the Hasse interval.
    fn group_order(&self, rng: &mut ChaCha8Rng) -> Option<u64> {
        let p = self.p;
        let spread = (4 * p).isqrt();
        let lo = p + 1 - spread;
        let hi = p + 1 + spread;
        let mut l = 1u64;
        for _ in 0..POINTS_PER_CURVE {
            let q = self.random_point(rng);
            let ord = self.order_in_interval(q, lo, hi)?;
            l = l.lcm(&ord);
            let first = lo.div_ceil(l) * l;
            if first + l > hi {
                return (first <= hi).then_some(first);
            }
        }
        None
    }
}

fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Tonelli-Shanks; `None` for non-residues.
fn sqrt_mod(v: u64, p: u64) -> Option<u64> {
    if v == 0 {
        return Some(0);
    }
    if pow_mod(v, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(v, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(v, q, p);
    let mut r = pow_mod(v, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

fn trace_by_bsgs(m: &WeierstrassModel, p: u64) -> Result<i64, EcqError> {
    // 6 is invertible, so y^2 = x^3 - 27 c4 x - 54 c6 is isomorphic over F_p.
    let a = reduce(&(-27 * m.c4()), p);
    let b = reduce(&(-54 * m.c6()), p);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let curve = ShortCurve { a, b, p };
    if let Some(n) = curve.group_order(&mut rng) {
        return Ok(p as i64 + 1 - n as i64);
    }
    // #E + #E' = 2p + 2 for the twist E' by a non-residue.
    let nonresidue = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1).unwrap();
    let d2 = mul_mod(nonresidue, nonresidue, p);
    let twist = ShortCurve {
        a: mul_mod(a, d2, p),
        b: mul_mod(b, mul_mod(d2, nonresidue, p), p),
        p,
    };
    let n_twist = twist.group_order(&mut rng).ok_or(EcqError::AmbiguousGroupOrder(p))?;
    Ok(n_twist as i64 - (p as i64 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    // Independent oracle: double loop over F_p^2 on the long model.
    fn naive_trace(m: &WeierstrassModel, p: u64) -> i64 {
        let [a1, a2, a3, a4, a6] = m.ainvs().clone().map(|c| reduce(&c, p));
        let mut n = 1i64;
        for x in 0..p {
            let rhs = ((x * x % p) * x + a2 * (x * x % p) + a4 * x + a6) % p;
            for y in 0..p {
                if (y * y + a1 * x % p * y + a3 * y) % p == rhs {
                    n += 1;
                }
            }
        }
        p as i64 + 1 - n
    }

    fn model(a: [i64; 5]) -> WeierstrassModel {
        WeierstrassModel::from_i64(a).unwrap()
    }

    #[test]
    fn examples() {
        let e = model([0, 0, 0, -1, 0]);
        assert_eq!(a_p(&e, 3).unwrap(), 0);
        assert_eq!(a_p(&e, 5).unwrap(), -2);
        assert_eq!(a_p(&model([0, 0, 0, 0, 1]), 5).unwrap(), 0);
        assert!(matches!(a_p(&e, 2), Err(EcqError::BadReduction(2))));
        assert!(matches!(a_p(&e, 9), Err(EcqError::NotPrime(_))));
        assert!(matches!(a_p(&e, 1_000_000_007), Err(EcqError::PointCountBudget(_))));
    }

    #[test]
    fn good_reduction_at_two() {
        // 11a1 has a_2 = -2, 37a1 has a_2 = -2, 17a1 has a_2 = -1.
        assert_eq!(a_p(&model([0, -1, 1, -10, -20]), 2).unwrap(), -2);
        assert_eq!(a_p(&model([0, 0, 1, -1, 0]), 2).unwrap(), -2);
        assert_eq!(a_p(&model([1, -1, 1, -1, -14]), 2).unwrap(), -1);
    }

    #[test]
    fn residue_count_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let primes: Vec<u64> = (3..400).filter(|&p| is_prime_u64(p)).collect();
        let mut curves = 0;
        while curves < 20 {
            let a: [i64; 5] = std::array::from_fn(|_| rng.gen_range(-30..=30));
            let Ok(e) = WeierstrassModel::from_i64(a) else { continue };
            curves += 1;
            for &p in &primes {
                if reduce(e.disc(), p) == 0 {
                    continue;
                }
                let t = a_p(&e, p).unwrap();
                assert_eq!(t, naive_trace(&e, p), "{e} at {p}");
                assert!(t * t <= 4 * p as i64);
            }
        }
    }

    #[test]
    fn bsgs_matches_residue_count() {
        let curves = [[0, -1, 1, -10, -20], [1, -1, 1, -1, -14], [0, 0, 0, -1, 0], [0, 0, 0, 0, 1], [0, 1, 1, -2, 0]];
        for a in curves {
            let e = model(a);
            // Above 229 one of E and its twist always has a unique group order.
            for p in (230u64..9000).filter(|&p| is_prime_u64(p)).step_by(37) {
                if reduce(e.disc(), p) == 0 {
                    continue;
                }
                assert_eq!(trace_by_bsgs(&e, p).unwrap(), trace_by_residues(&e, p), "{e} at {p}");
            }
        }
    }

    #[test]
    fn bsgs_large_prime_hasse() {
        let e = model([0, 0, 1, -1, 0]);
        for p in [10_007u64, 1_000_003, 99_999_989] {
            let t = a_p(&e, p).unwrap();
            assert!((t as i128) * (t as i128) <= 4 * p as i128);
        }
        // Supersingular: y^2 = x^3 + 1 at p ≡ 2 mod 3 has a_p = 0.
        assert_eq!(a_p(&model([0, 0, 0, 0, 1]), 1_000_037).unwrap(), 0);
        // CM by Z[i]: y^2 = x^3 - x at p ≡ 3 mod 4 has a_p = 0.
        assert_eq!(a_p(&model([0, 0, 0, -1, 0]), 1_000_003).unwrap(), 0);
    }

    #[test]
    fn sqrt_mod_roundtrip() {
        for p in [13u64, 17, 97, 1_000_033] {
            for v in 1..200 {
                if let Some(r) = sqrt_mod(v % p, p) {
                    assert_eq!(mul_mod(r, r, p), v % p);
                }
            }
        }
    }
}
