//! Tate's algorithm, following the classical formulation with explicit
//! coordinate changes at p = 2 and p = 3.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::model::{rst_in_place, Invariants, Isomorphism, WeierstrassModel};
use super::EcqError;

/// Kodaira symbol of the special fibre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kodaira {
    /// `I_n` (`I_0` is good reduction).
    I(u32),
    /// `I_n^*`.
    IStar(u32),
    II,
    III,
    IV,
    IVStar,
    IIIStar,
    IIStar,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Good,
    Multiplicative,
    Additive,
}

/// Local reduction data at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalReduction {
    pub p: BigInt,
    pub kodaira: Kodaira,
    /// Exponent of `p` in the conductor.
    pub f_p: u32,
    pub kind: ReductionKind,
    /// Valuation of the minimal discriminant at `p`.
    pub disc_valuation: u32,
    /// Split multiplicative reduction; `None` unless multiplicative.
    pub split: Option<bool>,
}

pub(crate) struct TateOutcome {
    pub reduction: LocalReduction,
    /// A p-minimal model (integral at every prime).
    pub model: [BigInt; 5],
    /// From the input model to `model`.
    pub iso: Isomorphism,
}

/// Reduction type and conductor exponent of a `p`-minimal model at `p`.
pub fn tate_local(m: &WeierstrassModel, p: &BigInt) -> Result<LocalReduction, EcqError> {
    tate_core(m.ainvs(), p, false).map(|o| o.reduction)
}

fn val(x: &BigInt, p: &BigInt) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

fn divides(p: &BigInt, x: &BigInt) -> bool {
    (x % p).is_zero()
}

fn exact(x: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = x.div_rem(d);
    debug_assert!(r.is_zero(), "{x} not divisible by {d}");
    q
}

/// Inverse of `x` modulo prime `p`.
fn inv_mod(x: &BigInt, p: &BigInt) -> BigInt {
    let e = x.mod_floor(p).extended_gcd(p);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(p)
}

/// Does `a X^2 + b X + c` have a root mod `p`?
fn quad_has_root(a: &BigInt, b: &BigInt, c: &BigInt, p: &BigInt) -> bool {
    let (a, b, c) = (a.mod_floor(p), b.mod_floor(p), c.mod_floor(p));
    if a.is_zero() {
        return !b.is_zero() || c.is_zero();
    }
    if p == &BigInt::from(2) {
        // Roots in F_2: test 0 and 1 directly.
        return c.is_zero() || (&a + &b + &c).is_even();
    }
    let d: BigInt = &b * &b - 4 * &a * &c;
    let d = d.mod_floor(p);
    if d.is_zero() {
        return true;
    }
    let e = (p - 1u32) / 2;
    d.modpow(&e, p).is_one()
}

pub(crate) fn tate_core(
    input: &[BigInt; 5],
    p: &BigInt,
    allow_rescale: bool,
) -> Result<TateOutcome, EcqError> {
    if p < &BigInt::from(2) {
        return Err(EcqError::NotPrime(p.to_string()));
    }
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let is2 = p == &two;
    let is3 = p == &three;
    let half = if is2 { BigInt::zero() } else { (p + 1u32) / 2 };
    let pmod = |x: &BigInt| x.mod_floor(p);
    let p2 = p * p;

    let mut a = input.clone();
    let mut iso = Isomorphism::identity();

    let apply = |a: &mut [BigInt; 5], iso: &mut Isomorphism, r: BigInt, s: BigInt, t: BigInt| {
        rst_in_place(a, &r, &s, &t);
        *iso = iso.then(&Isomorphism::rst(r, s, t));
    };

    loop {
        let inv = Invariants::compute(&a).ok_or(EcqError::SingularModel)?;
        let vd = val(&inv.disc, p);
        let finish = |kodaira: Kodaira, f_p: u32, kind: ReductionKind, split: Option<bool>, a: [BigInt; 5], iso: Isomorphism| {
            Ok(TateOutcome {
                reduction: LocalReduction {
                    p: p.clone(),
                    kodaira,
                    f_p,
                    kind,
                    disc_valuation: vd,
                    split,
                },
                model: a,
                iso,
            })
        };
        if vd == 0 {
            return finish(Kodaira::I(0), 0, ReductionKind::Good, None, a, iso);
        }

        // Move the singular point to (0, 0): p | a3, a4, a6.
        let (r, t) = if is2 {
            if divides(p, &inv.b2) {
                let r = pmod(&a[3]);
                let t = pmod(&(&r * (1 + &a[1] + &a[3]) + &a[4]));
                (r, t)
            } else {
                let r = pmod(&a[2]);
                let t = pmod(&(&r + &a[3]));
                (r, t)
            }
        } else if is3 {
            let r = if divides(p, &inv.b2) {
                pmod(&-&inv.b6)
            } else {
                pmod(&(-&inv.b2 * &inv.b4))
            };
            let t = pmod(&(&a[0] * &r + &a[2]));
            (r, t)
        } else {
            let r = if divides(p, &inv.c4) {
                pmod(&(-&inv.b2 * inv_mod(&BigInt::from(12), p)))
            } else {
                pmod(&(-(&inv.c6 + &inv.b2 * &inv.c4) * inv_mod(&(12 * &inv.c4), p)))
            };
            let t = pmod(&(-&half * (&a[0] * &r + &a[2])));
            (r, t)
        };
        apply(&mut a, &mut iso, r, BigInt::zero(), t);

        if !divides(p, &inv.c4) {
            let split = quad_has_root(&BigInt::one(), &a[0], &-&a[1], p);
            return finish(Kodaira::I(vd), 1, ReductionKind::Multiplicative, Some(split), a, iso);
        }
        if val(&a[4], p) < 2 {
            return finish(Kodaira::II, vd, ReductionKind::Additive, None, a, iso);
        }
        let cur = Invariants::compute(&a).ok_or(EcqError::SingularModel)?;
        if val(&cur.b8, p) < 3 {
            return finish(Kodaira::III, vd - 1, ReductionKind::Additive, None, a, iso);
        }
        if val(&cur.b6, p) < 3 {
            return finish(Kodaira::IV, vd - 2, ReductionKind::Additive, None, a, iso);
        }

        // p | a1, a2; p^2 | a3, a4; p^3 | a6.
        let (s, t) = if is2 {
            (pmod(&a[1]), p * pmod(&exact(&a[4], &p2)))
        } else if is3 {
            (pmod(&a[0]), p * pmod(&exact(&a[2], p)))
        } else {
            (
                pmod(&(-&a[0] * &half)),
                p * pmod(&(-&half * exact(&a[2], p))),
            )
        };
        apply(&mut a, &mut iso, BigInt::zero(), s, t);

        // Cubic T^3 + b T^2 + c T + d with b = a2/p, c = a4/p^2, d = a6/p^3.
        let b = exact(&a[1], p);
        let c = exact(&a[3], &p2);
        let d = exact(&a[4], &(&p2 * p));
        let w = 27 * &d * &d - &b * &b * &c * &c + 4 * &b * &b * &b * &d - 18 * &b * &c * &d
            + 4 * &c * &c * &c;
        let x = 3 * &c - &b * &b;
        let roots = if divides(p, &w) {
            if divides(p, &x) {
                3
            } else {
                2
            }
        } else {
            1
        };

        if roots == 1 {
            return finish(Kodaira::IStar(0), vd - 4, ReductionKind::Additive, None, a, iso);
        }

        if roots == 2 {
            // Shift the double root to T = 0.
            let r = if is2 {
                c.clone()
            } else if is3 {
                &b * &c
            } else {
                (&b * &c - 9 * &d) * inv_mod(&(2 * &x), p)
            };
            apply(&mut a, &mut iso, p * pmod(&r), BigInt::zero(), BigInt::zero());

            let mut ix = 3u32;
            let mut iy = 3u32;
            let mut mx = p2.clone();
            let mut my = p2.clone();
            loop {
                let a3t = exact(&a[2], &my);
                let a6t = exact(&a[4], &(&mx * &my));
                if !divides(p, &(&a3t * &a3t + 4 * &a6t)) {
                    break;
                }
                let t = if is2 {
                    &my * pmod(&a6t)
                } else {
                    &my * pmod(&(-&a3t * &half))
                };
                apply(&mut a, &mut iso, BigInt::zero(), BigInt::zero(), t);
                my = &my * p;
                iy += 1;
                let a2t = exact(&a[1], p);
                let a4t = exact(&a[3], &(p * &mx));
                let a6t = exact(&a[4], &(&mx * &my));
                if !divides(p, &(&a4t * &a4t - 4 * &a6t * &a2t)) {
                    break;
                }
                let r = if is2 {
                    &mx * pmod(&(&a6t * &a2t))
                } else {
                    &mx * pmod(&(-&a4t * inv_mod(&(2 * &a2t), p)))
                };
                apply(&mut a, &mut iso, r, BigInt::zero(), BigInt::zero());
                mx = &mx * p;
                ix += 1;
            }
            let n = ix + iy - 5;
            return finish(Kodaira::IStar(n), vd - n - 4, ReductionKind::Additive, None, a, iso);
        }

        // Triple root: shift it to T = 0.
        let r = if is2 {
            b.clone()
        } else if is3 {
            -&d
        } else {
            -&b * inv_mod(&three, p)
        };
        apply(&mut a, &mut iso, p * pmod(&r), BigInt::zero(), BigInt::zero());

        let x3t = exact(&a[2], &p2);
        let x6t = exact(&a[4], &(&p2 * &p2));
        if !divides(p, &(&x3t * &x3t + 4 * &x6t)) {
            return finish(Kodaira::IVStar, vd - 6, ReductionKind::Additive, None, a, iso);
        }
        let t = if is2 {
            &p2 * pmod(&x6t)
        } else {
            &p2 * pmod(&(-&x3t * &half))
        };
        apply(&mut a, &mut iso, BigInt::zero(), BigInt::zero(), t);
        if val(&a[3], p) < 4 {
            return finish(Kodaira::IIIStar, vd - 7, ReductionKind::Additive, None, a, iso);
        }
        if val(&a[4], p) < 6 {
            return finish(Kodaira::IIStar, vd - 8, ReductionKind::Additive, None, a, iso);
        }

        if !allow_rescale {
            return Err(EcqError::NotMinimal(p.to_string()));
        }
        let mut pi = BigInt::one();
        for coeff in a.iter_mut().take(4) {
            pi *= p;
            *coeff = exact(coeff, &pi);
        }
        a[4] = exact(&a[4], &(&p2 * &p2 * &p2));
        iso = iso.then(&Isomorphism::scaling(p.clone()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn local(a: [i64; 5], p: i64) -> LocalReduction {
        tate_local(&WeierstrassModel::from_i64(a).unwrap(), &BigInt::from(p)).unwrap()
    }

    #[test]
    fn spec_examples() {
        let r = local([0, 0, 0, -1, 0], 5);
        assert_eq!((r.kind, r.f_p), (ReductionKind::Good, 0));
        let r = local([0, 0, 0, -1, 0], 2);
        assert_eq!((r.kind, r.f_p), (ReductionKind::Additive, 5));
        let r = local([0, -1, 1, 0, 0], 11);
        assert_eq!((r.kind, r.f_p, r.kodaira), (ReductionKind::Multiplicative, 1, Kodaira::I(1)));
    }

    #[test]
    fn known_kodaira_types() {
        // 11a1 has split I5 at 11.
        let r = local([0, -1, 1, -10, -20], 11);
        assert_eq!(r.kodaira, Kodaira::I(5));
        assert_eq!(r.split, Some(true));
        // 27a1: y^2 + y = x^3 - 7 is IV* at 3 with f = 3.
        let r = local([0, 0, 1, 0, -7], 3);
        assert_eq!((r.kodaira, r.f_p), (Kodaira::IVStar, 3));
        // y^2 = x^3 + 1 at 2: IV, f = 2; at 3: III, f = 2.
        let r = local([0, 0, 0, 0, 1], 2);
        assert_eq!((r.kodaira, r.f_p), (Kodaira::IV, 2));
        let r = local([0, 0, 0, 0, 1], 3);
        assert_eq!((r.kodaira, r.f_p), (Kodaira::III, 2));
        // y^2 = x^3 - x at 2: III, f = 5.
        assert_eq!(local([0, 0, 0, -1, 0], 2).kodaira, Kodaira::III);
        // Short model at p >= 5 with additive reduction: y^2 = x^3 + 5 is II at 5.
        let r = local([0, 0, 0, 0, 5], 5);
        assert_eq!((r.kodaira, r.f_p), (Kodaira::II, 2));
        // y^2 = x^3 - 25x: I0* at 5.
        assert_eq!(local([0, 0, 0, -25, 0], 5).kodaira, Kodaira::IStar(0));
        // y^2 = x^3 + 625: IV* at 5 (v(a6) = 4).
        assert_eq!(local([0, 0, 0, 0, 625], 5).kodaira, Kodaira::IVStar);
    }

    #[test]
    fn non_minimal_is_reported() {
        // y^2 = x^3 - 256 x is the u = 4 rescaling of y^2 = x^3 - x.
        let e = WeierstrassModel::from_i64([0, 0, 0, -256, 0]).unwrap();
        assert!(matches!(tate_local(&e, &BigInt::from(2)), Err(EcqError::NotMinimal(_))));
        let out = tate_core(e.ainvs(), &BigInt::from(2), true).unwrap();
        assert_eq!(out.reduction.f_p, 5);
        assert_eq!(out.iso.scale(), num_rational::BigRational::from_integer(4.into()));
    }

    #[test]
    fn ogg_bounds_hold_on_a_grid() {
        // f_p <= 2 for p >= 5, f_3 <= 5, f_2 <= 8, and the kind/exponent link.
        for a1 in 0..2 {
            for a3 in 0..2 {
                for a4 in -6i64..=6 {
                    for a6 in -6i64..=6 {
                        let Ok(e) = WeierstrassModel::from_i64([a1, 0, a3, a4, a6]) else { continue };
                        let f = crate::arith::factorize(e.disc()).unwrap();
                        for (p, _) in f.factors() {
                            let Ok(r) = tate_local(&e, p) else { continue };
                            match r.kind {
                                ReductionKind::Good => assert_eq!(r.f_p, 0),
                                ReductionKind::Multiplicative => assert_eq!(r.f_p, 1),
                                ReductionKind::Additive => assert!(r.f_p >= 2),
                            }
                            let cap = match p.to_string().as_str() {
                                "2" => 8,
                                "3" => 5,
                                _ => 2,
                            };
                            assert!(r.f_p <= cap, "{e} at {p}: {r:?}");
                        }
                    }
                }
            }
        }
    }
}
