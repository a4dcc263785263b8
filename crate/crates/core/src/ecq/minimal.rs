use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::arith::{factorize_with, FactorBudget, Factorization};

use super::model::{rst_in_place, Isomorphism, WeierstrassModel};
use super::tate::tate_core;
use super::EcqError;

/// A globally minimal model in reduced form (`a1, a3 ∈ {0,1}`,
/// `a2 ∈ {-1,0,1}`), with the factored minimal discriminant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalModel {
    pub model: WeierstrassModel,
    /// From the input model to `model`.
    pub iso: Isomorphism,
    pub disc: Factorization,
}

impl MinimalModel {
    /// Positive scaling factor `u` of the reduction.
    pub fn u(&self) -> BigRational {
        self.iso.scale()
    }
}

pub fn minimal_model(m: &WeierstrassModel) -> Result<MinimalModel, EcqError> {
    minimal_model_with(m, &[])
}

/// As [`minimal_model`], passing `hints` (known primes) to the
/// factorization of the discriminant.
pub fn minimal_model_with(m: &WeierstrassModel, hints: &[BigInt]) -> Result<MinimalModel, EcqError> {
    let disc = factorize_with(m.disc(), &FactorBudget::default(), hints)?;
    let mut a = m.ainvs().clone();
    let mut iso = Isomorphism::identity();
    let mut exponents = Vec::with_capacity(disc.omega());
    for (p, e) in disc.factors() {
        let mut e = *e;
        if e >= 12 {
            let out = tate_core(&a, p, true)?;
            let k = out.iso.scale().to_integer();
            // Each rescaling by p removes p^12 from the discriminant.
            let mut u = k;
            while u > BigInt::from(1) {
                u /= p;
                e -= 12;
            }
            a = out.model;
            iso = iso.then(&out.iso);
        }
        if e > 0 {
            exponents.push((p.clone(), e));
        }
    }

    // Reduce a1, a2, a3 to their canonical residues.
    let s = -(a[0].div_floor(&BigInt::from(2)));
    let shifted_a2: BigInt = &a[1] - &s * &a[0] - &s * &s;
    let r = -((shifted_a2 + BigInt::one()).div_floor(&BigInt::from(3)));
    let t = -((&a[2] + &r * &a[0]).div_floor(&BigInt::from(2)));
    rst_in_place(&mut a, &r, &s, &t);
    iso = iso.then(&Isomorphism::rst(r, s, t));

    let model = WeierstrassModel::new(a)?;
    let sign = if model.disc().is_negative() { -1 } else { 1 };
    let mut value = BigInt::from(sign);
    for (p, e) in &exponents {
        value *= num_traits::pow(p.clone(), *e as usize);
    }
    debug_assert_eq!(&value, model.disc());
    let disc = Factorization::from_parts(value, exponents)?;
    Ok(MinimalModel { model, iso, disc })
}
