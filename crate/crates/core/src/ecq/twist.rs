use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::FundamentalDiscriminant;

use super::model::WeierstrassModel;

/// A model of the quadratic twist `E^(D)`.
///
/// Short models `y^2 = x^3 + A x + B` become `y^2 = x^3 + A D^2 x + B D^3`.
/// Anything else is first brought to the short form
/// `y^2 = x^3 - 27 c4 x - 54 c6`. The result is generally not minimal.
pub fn quadratic_twist(m: &WeierstrassModel, d: &FundamentalDiscriminant) -> WeierstrassModel {
    twist_by(m, d.value())
}

pub(crate) fn twist_by(m: &WeierstrassModel, d: &BigInt) -> WeierstrassModel {
    let (a, b) = if m.is_short() {
        (m.ainvs()[3].clone(), m.ainvs()[4].clone())
    } else {
        (-27 * m.c4(), -54 * m.c6())
    };
    let d2 = d * d;
    let d3 = &d2 * d;
    WeierstrassModel::short(a * d2, b * d3).expect("twisting by a nonzero integer preserves nonsingularity")
}

/// Distinct integer roots of the monic cubic `X^3 + a X^2 + b X + c`, in
/// increasing order. Exact: monotone pieces are located from the integer
/// square root of the derivative's discriminant, then bisected.
pub(crate) fn integer_roots_monic_cubic(a: &BigInt, b: &BigInt, c: &BigInt) -> Vec<BigInt> {
    let f = |x: &BigInt| ((x + a) * x + b) * x + c;
    let bound = BigInt::one() + a.abs().max(b.abs()).max(c.abs());
    let mut roots: Vec<BigInt> = Vec::new();
    let mut push = |x: BigInt| {
        if !roots.contains(&x) {
            roots.push(x);
        }
    };

    let mut scan = |lo: &BigInt, hi: &BigInt| {
        let mut x = lo.clone();
        while &x <= hi {
            if f(&x).is_zero() {
                push(x.clone());
            }
            x += 1;
        }
    };
    // Integer root of a monotone piece via bisection.
    let bisect = |lo: &BigInt, hi: &BigInt, increasing: bool| -> Option<BigInt> {
        if lo > hi {
            return None;
        }
        let g = |x: &BigInt| if increasing { f(x) } else { -f(x) };
        if g(lo).is_positive() || g(hi).is_negative() {
            return None;
        }
        let (mut lo, mut hi) = (lo.clone(), hi.clone());
        // Invariant: g(lo) <= 0 <= g(hi).
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
            if g(&mid).is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        [lo, hi].into_iter().find(|x| g(x).is_zero())
    };

    let crit: BigInt = a * a - 3 * b;
    let mut found = Vec::new();
    if !crit.is_positive() {
        found.extend(bisect(&-&bound, &bound, true));
    } else {
        let s = crit.sqrt();
        let three = BigInt::from(3);
        let lo1 = (-a - &s - BigInt::one()).div_floor(&three);
        let hi1 = -((a + &s).div_floor(&three)); // ceil((-a - s) / 3)
        let lo2 = (-a + &s).div_floor(&three);
        let hi2 = -((a - &s - BigInt::one()).div_floor(&three)); // ceil((-a + s + 1) / 3)
        if hi1 >= lo2 {
            scan(&lo1, &hi2);
        } else {
            scan(&lo1, &hi1);
            scan(&lo2, &hi2);
            found.extend(bisect(&hi1, &lo2, false));
        }
        found.extend(bisect(&-&bound, &lo1, true));
        found.extend(bisect(&hi2, &bound, true));
    }
    for x in found {
        push(x);
    }
    roots.sort();
    roots
}

/// Dimension over F_2 of `E(Q)[2]`, from the rational roots of the
/// 2-division polynomial `4x^3 + b2 x^2 + 2 b4 x + b6`.
pub fn two_torsion_rank(m: &WeierstrassModel) -> u8 {
    // x = X/4 turns it into the monic X^3 + b2 X^2 + 8 b4 X + 16 b6.
    let inv = m.invariants();
    let roots = integer_roots_monic_cubic(&inv.b2, &(8 * &inv.b4), &(16 * &inv.b6));
    match roots.len() {
        0 => 0,
        1 => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecq::minimal_model;
    use proptest::prelude::*;

    fn model(a: [i64; 5]) -> WeierstrassModel {
        WeierstrassModel::from_i64(a).unwrap()
    }

    #[test]
    fn twist_examples() {
        let e = model([0, 0, 0, -1, 0]);
        let one = FundamentalDiscriminant::from_i64(1).unwrap();
        assert_eq!(quadratic_twist(&e, &one), e);
        let five = FundamentalDiscriminant::from_i64(5).unwrap();
        assert_eq!(quadratic_twist(&e, &five), model([0, 0, 0, -25, 0]));
    }

    #[test]
    fn twisting_twice_is_isomorphic() {
        for a in [[1, -1, 1, -1, -14], [0, -1, 1, -10, -20], [1, 0, 1, 4, -6]] {
            let e = model(a);
            let base = minimal_model(&e).unwrap();
            for d in [-4, 5, -3, 8, -8, 12, -15] {
                let d = FundamentalDiscriminant::from_i64(d).unwrap();
                let back = quadratic_twist(&quadratic_twist(&e, &d), &d);
                let back = minimal_model(&back).unwrap();
                assert_eq!(back.model, base.model);
                assert_eq!(back.disc, base.disc);
            }
        }
    }

    #[test]
    fn two_torsion_examples() {
        assert_eq!(two_torsion_rank(&model([0, 0, 0, -1, 0])), 2);
        assert_eq!(two_torsion_rank(&model([0, 0, 0, 0, 1])), 1);
        assert_eq!(two_torsion_rank(&model([0, -1, 1, 0, 0])), 0);
        assert_eq!(two_torsion_rank(&model([1, -1, 1, -1, -14])), 1); // 17a1, torsion Z/4
        assert_eq!(two_torsion_rank(&model([1, 1, 1, -10, -10])), 2); // 15a1, Z/2 x Z/4
    }

    fn brute_roots(a: i64, b: i64, c: i64) -> Vec<BigInt> {
        let bound = 1 + a.abs().max(b.abs()).max(c.abs());
        (-bound..=bound)
            .filter(|&x| ((x + a) * x + b) * x + c == 0)
            .map(BigInt::from)
            .collect()
    }

    #[test]
    fn cubic_roots_small_grid() {
        for a in -12..=12 {
            for b in -12..=12 {
                for c in -12..=12 {
                    let got = integer_roots_monic_cubic(&a.into(), &b.into(), &c.into());
                    assert_eq!(got, brute_roots(a, b, c), "({a},{b},{c})");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn cubic_roots_from_planted_factors(r1 in -10_000i64..10_000, r2 in -10_000i64..10_000, r3 in -10_000i64..10_000) {
            // (X - r1)(X - r2)(X - r3)
            let (r1b, r2b, r3b) = (BigInt::from(r1), BigInt::from(r2), BigInt::from(r3));
            let a = -(&r1b + &r2b + &r3b);
            let b = &r1b * &r2b + &r1b * &r3b + &r2b * &r3b;
            let c = -(&r1b * &r2b * &r3b);
            let mut want = vec![r1b, r2b, r3b];
            want.sort();
            want.dedup();
            prop_assert_eq!(integer_roots_monic_cubic(&a, &b, &c), want);
        }

        #[test]
        fn cubic_roots_one_planted(r in -100_000i64..100_000, p in -1000i64..1000, q in -1000i64..1000) {
            // (X - r)(X^2 + pX + q)
            let rb = BigInt::from(r);
            let a = BigInt::from(p) - &rb;
            let b = BigInt::from(q) - &rb * p;
            let c = -(&rb * q);
            let got = integer_roots_monic_cubic(&a, &b, &c);
            prop_assert!(got.contains(&rb));
            for x in &got {
                prop_assert!((((x + &a) * x + &b) * x + &c).is_zero());
            }
        }
    }
}
