//! The ω(D) threshold beyond which every twist is certified, and κ.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::arith::v2;
use crate::ecq::{CurveRecord, Provenance, Sourced};

use super::WatkinsError;

/// What to do when the Manin constant has not been ingested.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ManinPolicy {
    #[default]
    Require,
    /// Use `c_E = 1` and record [`Assumption::ManinAssumedOne`].
    AssumeOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Assumption {
    #[serde(rename = "manin_assumed_1")]
    ManinAssumedOne,
    #[serde(rename = "probabilistic_prime")]
    ProbabilisticPrime,
}

impl Assumption {
    pub fn tag(self) -> &'static str {
        match self {
            Assumption::ManinAssumedOne => "manin_assumed_1",
            Assumption::ProbabilisticPrime => "probabilistic_prime",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// `m_E` and `c_E` as used by the bounds, with their 2-adic valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularInputs {
    pub moddeg: Sourced<BigInt>,
    pub manin: Sourced<BigInt>,
    pub v2_moddeg: i64,
    pub v2_manin: i64,
    pub assumptions: Vec<Assumption>,
}

impl ModularInputs {
    /// `v2(m_E / c_E^2)`.
    pub fn v2_ratio(&self) -> i64 {
        self.v2_moddeg - 2 * self.v2_manin
    }
}

pub fn modular_inputs(curve: &CurveRecord, policy: ManinPolicy) -> Result<ModularInputs, WatkinsError> {
    let moddeg = curve.moddeg.clone().ok_or(WatkinsError::MissingInvariant("modular degree"))?;
    let mut assumptions = Vec::new();
    let manin = match (&curve.manin, policy) {
        (Some(c), _) => c.clone(),
        (None, ManinPolicy::AssumeOne) => {
            assumptions.push(Assumption::ManinAssumedOne);
            Sourced::new(BigInt::one(), Provenance::Assumed, None)
        }
        (None, ManinPolicy::Require) => return Err(WatkinsError::MissingInvariant("Manin constant")),
    };
    Ok(ModularInputs {
        v2_moddeg: v2(&moddeg.value)? as i64,
        v2_manin: v2(&manin.value)? as i64,
        moddeg,
        manin,
        assumptions,
    })
}

/// `t = 6 + 5 ω(N) - v2(m_E / c_E^2)` and `κ = max(t - 2, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdReport {
    pub t: i64,
    pub kappa: u64,
    pub omega_n: usize,
    pub inputs: ModularInputs,
}

/// Description of the κ rule, echoed in reports.
pub const KAPPA_RULE: &str = "kappa = max(t - 2, 0): failures have omega(D) <= t - 1, counted with exponent A - 1 at A = t - 1";

pub fn threshold_value(omega_n: usize, v2_ratio: i64) -> i64 {
    6 + 5 * omega_n as i64 - v2_ratio
}

pub fn kappa_from_threshold(t: i64) -> u64 {
    (t - 2).max(0) as u64
}

pub fn watkins_threshold(curve: &CurveRecord, policy: ManinPolicy) -> Result<ThresholdReport, WatkinsError> {
    let inputs = modular_inputs(curve, policy)?;
    let omega_n = curve.conductor.omega();
    let t = threshold_value(omega_n, inputs.v2_ratio());
    Ok(ThresholdReport {
        t,
        kappa: kappa_from_threshold(t),
        omega_n,
        inputs,
    })
}

pub fn kappa(curve: &CurveRecord, policy: ManinPolicy) -> Result<u64, WatkinsError> {
    Ok(watkins_threshold(curve, policy)?.kappa)
}
