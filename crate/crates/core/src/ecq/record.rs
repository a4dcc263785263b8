use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::Factorization;

use super::minimal::minimal_model_with;
use super::model::WeierstrassModel;
use super::tate::{tate_local, LocalReduction};
use super::twist::two_torsion_rank;
use super::EcqError;

/// Where a value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Computed,
    Remote,
    Cache,
    Fixture,
    Assumed,
}

impl Provenance {
    /// The serialized name.
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::Computed => "computed",
            Provenance::Remote => "remote",
            Provenance::Cache => "cache",
            Provenance::Fixture => "fixture",
            Provenance::Assumed => "assumed",
        }
    }
}

/// A value tagged with its source and, for ingested data, the time it was
/// fetched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sourced<T> {
    pub value: T,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fetched_at: Option<String>,
}

impl<T> Sourced<T> {
    pub fn new(value: T, provenance: Provenance, fetched_at: Option<String>) -> Self {
        Self {
            value,
            provenance,
            fetched_at,
        }
    }
}

/// A globally minimal curve with its local data and ingested invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveRecord {
    pub minimal_model: WeierstrassModel,
    pub min_disc: Factorization,
    pub conductor: Factorization,
    /// One entry per prime of bad reduction, increasing.
    pub local: Vec<LocalReduction>,
    pub two_torsion_rank: u8,
    /// Modular degree `m_E`.
    pub moddeg: Option<Sourced<BigInt>>,
    /// Manin constant `c_E`.
    pub manin: Option<Sourced<BigInt>>,
    pub rank: Option<Sourced<u32>>,
    pub label: Option<String>,
}

impl CurveRecord {
    pub fn from_model(m: &WeierstrassModel) -> Result<Self, EcqError> {
        Self::from_model_with(m, &[])
    }

    /// Computes minimal model, conductor and 2-torsion, passing `hints`
    /// (known primes) to the discriminant factorization.
    pub fn from_model_with(m: &WeierstrassModel, hints: &[BigInt]) -> Result<Self, EcqError> {
        let min = minimal_model_with(m, hints)?;
        let mut local = Vec::with_capacity(min.disc.omega());
        let mut factors = Vec::with_capacity(min.disc.omega());
        let mut value = BigInt::one();
        for p in min.disc.primes() {
            let red = tate_local(&min.model, p)?;
            if red.f_p > 0 {
                value *= num_traits::pow(p.clone(), red.f_p as usize);
                factors.push((p.clone(), red.f_p));
            }
            local.push(red);
        }
        let conductor = Factorization::from_parts(value, factors)?;
        Ok(Self {
            two_torsion_rank: two_torsion_rank(&min.model),
            minimal_model: min.model,
            min_disc: min.disc,
            conductor,
            local,
            moddeg: None,
            manin: None,
            rank: None,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_moddeg(mut self, m: Sourced<BigInt>) -> Self {
        self.moddeg = Some(m);
        self
    }

    /// Sets the Manin constant, which must be a positive integer.
    pub fn with_manin(mut self, c: Sourced<BigInt>) -> Result<Self, EcqError> {
        if !c.value.is_positive() {
            return Err(EcqError::InvalidManin(c.value.to_string()));
        }
        self.manin = Some(c);
        Ok(self)
    }

    pub fn with_rank(mut self, r: Sourced<u32>) -> Self {
        self.rank = Some(r);
        self
    }

    pub fn local_at(&self, p: &BigInt) -> Option<&LocalReduction> {
        self.local.iter().find(|r| &r.p == p)
    }

    /// Primes of bad reduction together with the primes of the minimal
    /// discriminant, for reuse as factoring hints.
    pub fn known_primes(&self) -> Vec<BigInt> {
        self.min_disc.primes().cloned().collect()
    }
}

/// Conductor of the curve defined by `m`.
pub fn conductor(m: &WeierstrassModel) -> Result<Factorization, EcqError> {
    Ok(CurveRecord::from_model(m)?.conductor)
}
