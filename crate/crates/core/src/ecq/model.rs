use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::EcqError;

/// Invariants derived from the a-coefficients by the standard formulary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Invariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    pub j: BigRational,
}

impl Invariants {
    /// b- and c-invariants and the discriminant; `None` when singular.
    pub(crate) fn compute(a: &[BigInt; 5]) -> Option<Self> {
        let [a1, a2, a3, a4, a6] = a;
        let b2: BigInt = a1 * a1 + 4 * a2;
        let b4: BigInt = 2 * a4 + a1 * a3;
        let b6: BigInt = a3 * a3 + 4 * a6;
        let b8: BigInt = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4: BigInt = &b2 * &b2 - 24 * &b4;
        let c6: BigInt = -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * &b6;
        let disc: BigInt = -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6;
        if disc.is_zero() {
            return None;
        }
        let j = BigRational::new(&c4 * &c4 * &c4, disc.clone());
        Some(Self {
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
            j,
        })
    }
}

/// Nonsingular long Weierstrass equation
/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeierstrassModel {
    a: [BigInt; 5],
    inv: Invariants,
}

impl WeierstrassModel {
    pub fn new(a: [BigInt; 5]) -> Result<Self, EcqError> {
        let inv = Invariants::compute(&a).ok_or(EcqError::SingularModel)?;
        Ok(Self { a, inv })
    }

    pub fn from_i64([a1, a2, a3, a4, a6]: [i64; 5]) -> Result<Self, EcqError> {
        Self::new([a1.into(), a2.into(), a3.into(), a4.into(), a6.into()])
    }

    /// Short form `y^2 = x^3 + A x + B`.
    pub fn short(a4: BigInt, a6: BigInt) -> Result<Self, EcqError> {
        Self::new([BigInt::zero(), BigInt::zero(), BigInt::zero(), a4, a6])
    }

    /// `[a1, a2, a3, a4, a6]`.
    pub fn ainvs(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn invariants(&self) -> &Invariants {
        &self.inv
    }

    pub fn disc(&self) -> &BigInt {
        &self.inv.disc
    }

    pub fn j(&self) -> &BigRational {
        &self.inv.j
    }

    pub fn c4(&self) -> &BigInt {
        &self.inv.c4
    }

    pub fn c6(&self) -> &BigInt {
        &self.inv.c6
    }

    pub fn is_short(&self) -> bool {
        self.a[0].is_zero() && self.a[1].is_zero() && self.a[2].is_zero()
    }
}

/// The derived quantities `(b2, b4, b6, b8, c4, c6, disc, j)`.
pub fn model_invariants(m: &WeierstrassModel) -> Invariants {
    m.inv.clone()
}

impl fmt::Debug for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        write!(f, "[{a1},{a2},{a3},{a4},{a6}]")
    }
}

/// Change of coordinates `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub u: BigRational,
    pub r: BigRational,
    pub s: BigRational,
    pub t: BigRational,
}

impl Isomorphism {
    pub fn identity() -> Self {
        Self::new(BigRational::one(), BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    pub fn new(u: BigRational, r: BigRational, s: BigRational, t: BigRational) -> Self {
        assert!(!u.is_zero(), "scaling u must be nonzero");
        Self { u, r, s, t }
    }

    pub fn from_ints(u: i64, r: i64, s: i64, t: i64) -> Self {
        let q = |v: i64| BigRational::from_integer(v.into());
        Self::new(q(u), q(r), q(s), q(t))
    }

    pub(crate) fn rst(r: BigInt, s: BigInt, t: BigInt) -> Self {
        Self::new(
            BigRational::one(),
            BigRational::from_integer(r),
            BigRational::from_integer(s),
            BigRational::from_integer(t),
        )
    }

    pub(crate) fn scaling(u: BigInt) -> Self {
        Self::new(BigRational::from_integer(u), BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    /// The transformation that applies `self` first, then `next`.
    pub fn then(&self, next: &Isomorphism) -> Isomorphism {
        let u1 = &self.u;
        let u1_2 = u1 * u1;
        Isomorphism {
            u: u1 * &next.u,
            r: &self.r + &u1_2 * &next.r,
            s: &self.s + u1 * &next.s,
            t: &self.t + &u1_2 * u1 * &next.t + &u1_2 * &self.s * &next.r,
        }
    }

    pub fn inverse(&self) -> Isomorphism {
        let u = &self.u;
        Isomorphism {
            u: u.recip(),
            r: -&self.r / (u * u),
            s: -&self.s / u,
            t: (&self.s * &self.r - &self.t) / (u * u * u),
        }
    }

    /// Transformed coefficients as rationals.
    pub fn apply_rational(&self, a: &[BigRational; 5]) -> [BigRational; 5] {
        let [a1, a2, a3, a4, a6] = a;
        let Isomorphism { u, r, s, t } = self;
        let two = BigRational::from_integer(2.into());
        let three = BigRational::from_integer(3.into());
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        [
            (a1 + &two * s) / u,
            (a2 - s * a1 + &three * r - s * s) / &u2,
            (a3 + r * a1 + &two * t) / &u3,
            (a4 - s * a3 + &two * r * a2 - (t + r * s) * a1 + &three * r * r - &two * s * t) / &u4,
            (a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1) / &u6,
        ]
    }

    /// Applies the change of coordinates; fails when the image is not integral.
    pub fn apply(&self, m: &WeierstrassModel) -> Result<WeierstrassModel, EcqError> {
        let a = m.a.clone().map(BigRational::from_integer);
        let image = self.apply_rational(&a);
        if image.iter().any(|c| !c.is_integer()) {
            return Err(EcqError::NonIntegral);
        }
        WeierstrassModel::new(image.map(|c| c.to_integer()))
    }

    /// `|u|`, the absolute scaling factor.
    pub fn scale(&self) -> BigRational {
        self.u.abs()
    }
}

/// Integral `(1, r, s, t)` change of coordinates, in place.
pub(crate) fn rst_in_place(a: &mut [BigInt; 5], r: &BigInt, s: &BigInt, t: &BigInt) {
    let [a1, a2, a3, a4, a6] = a.clone();
    a[0] = &a1 + 2 * s;
    a[1] = &a2 - s * &a1 + 3 * r - s * s;
    a[2] = &a3 + r * &a1 + 2 * t;
    a[3] = &a4 - s * &a3 + 2 * r * &a2 - (t + r * s) * &a1 + 3 * r * r - 2 * s * t;
    a[4] = &a6 + r * &a4 + r * r * &a2 + r * r * r - t * &a3 - t * t - r * t * &a1;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn formulary_examples() {
        let e = WeierstrassModel::from_i64([0, 0, 0, -1, 0]).unwrap();
        let inv = e.invariants();
        assert_eq!(inv.b2, 0.into());
        assert_eq!(inv.b4, (-2).into());
        assert_eq!(inv.b6, 0.into());
        assert_eq!(inv.c4, 48.into());
        assert_eq!(inv.disc, 64.into());
        assert_eq!(inv.j, q(1728));

        let e = WeierstrassModel::from_i64([0, 0, 0, 0, 1]).unwrap();
        assert_eq!(e.disc(), &BigInt::from(-432));
        assert_eq!(e.j(), &q(0));

        assert!(matches!(WeierstrassModel::from_i64([0, 0, 0, 0, 0]), Err(EcqError::SingularModel)));
    }

    #[test]
    fn formulary_identities() {
        for a in [[0, -1, 1, -10, -20], [1, -1, 1, -1, -14], [1, 0, 1, 4, -6], [0, 1, 1, -2, 0]] {
            let e = WeierstrassModel::from_i64(a).unwrap();
            let i = e.invariants();
            assert_eq!(4 * &i.b8, &i.b2 * &i.b6 - &i.b4 * &i.b4);
            assert_eq!(&i.c4 * &i.c4 * &i.c4 - &i.c6 * &i.c6, 1728 * &i.disc);
        }
    }

    #[test]
    fn isomorphism_algebra() {
        let e = WeierstrassModel::from_i64([1, -1, 1, -1, -14]).unwrap();
        let f = Isomorphism::new(q(1) / q(2), q(3), q(-1), q(5));
        let g = Isomorphism::from_ints(1, -2, 1, 7);
        let via_composite = f.then(&g).apply(&e).unwrap();
        let stepwise = g.apply(&f.apply(&e).unwrap()).unwrap();
        assert_eq!(via_composite, stepwise);
        assert_eq!(f.inverse().apply(&f.apply(&e).unwrap()).unwrap(), e);
        assert_eq!(f.then(&f.inverse()), Isomorphism::identity());
        let image = f.apply(&e).unwrap();
        assert_eq!(image.j(), e.j());
        assert_eq!(image.disc(), &(e.disc() * BigInt::from(4096)));
    }

    #[test]
    fn rst_matches_rational_apply() {
        let e = WeierstrassModel::from_i64([0, -1, 1, -10, -20]).unwrap();
        let mut a = e.ainvs().clone();
        rst_in_place(&mut a, &4.into(), &(-3).into(), &11.into());
        let want = Isomorphism::from_ints(1, 4, -3, 11).apply(&e).unwrap();
        assert_eq!(&a, want.ainvs());
    }
}
