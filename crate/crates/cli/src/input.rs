use std::str::FromStr;

use num_bigint::BigInt;
use watkins_core::data::Resolver;
use watkins_core::ecq::{CurveRecord, WeierstrassModel};

use crate::CliError;

/// A curve given by label or by five a-invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveInput {
    Label(String),
    Ainvs([BigInt; 5]),
}

impl FromStr for CurveInput {
    type Err = CliError;

    /// `a1,a2,a3,a4,a6` (brackets and spaces allowed).
    fn from_str(s: &str) -> Result<Self, CliError> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let bad = || CliError::Usage(format!("expected five comma-separated integers a1,a2,a3,a4,a6, got `{s}`"));
        if parts.len() != 5 {
            return Err(bad());
        }
        let mut a: [BigInt; 5] = Default::default();
        for (slot, p) in a.iter_mut().zip(parts) {
            *slot = p.parse().map_err(|_| bad())?;
        }
        Ok(CurveInput::Ainvs(a))
    }
}

impl std::fmt::Display for CurveInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveInput::Label(l) => f.write_str(l),
            CurveInput::Ainvs(a) => write!(f, "[{},{},{},{},{}]", a[0], a[1], a[2], a[3], a[4]),
        }
    }
}

/// Resolves the curve and attaches whatever invariants the cache or fixtures
/// hold. A-invariant input is minimalized and matched locally, never over
/// the network.
pub fn resolve_curve(input: &CurveInput, resolver: &Resolver) -> Result<CurveRecord, CliError> {
    match input {
        CurveInput::Label(label) => Ok(resolver.by_label(label)?.to_record()?),
        CurveInput::Ainvs(a) => {
            let rec = CurveRecord::from_model(&WeierstrassModel::new(a.clone())?)?;
            match resolver.by_ainvs(rec.minimal_model.ainvs())? {
                Some(row) => Ok(row.to_record()?),
                None => Ok(rec),
            }
        }
    }
}
