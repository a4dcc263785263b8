use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::ecq::{CurveRecord, Provenance, Sourced, WeierstrassModel};

use super::DataError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    Remote,
    Cache,
    Fixture,
}

impl From<RowSource> for Provenance {
    fn from(s: RowSource) -> Self {
        match s {
            RowSource::Remote => Provenance::Remote,
            RowSource::Cache => Provenance::Cache,
            RowSource::Fixture => Provenance::Fixture,
        }
    }
}

/// A curve as ingested, before any local computation. Integers other than
/// the rank and torsion invariants are decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveDataRow {
    pub label: String,
    #[serde(with = "decimal_array")]
    pub ainvs: [BigInt; 5],
    #[serde(with = "decimal")]
    pub conductor: BigInt,
    #[serde(with = "opt_decimal")]
    pub moddeg: Option<BigInt>,
    #[serde(with = "opt_decimal")]
    pub manin: Option<BigInt>,
    pub rank: Option<u32>,
    pub torsion_structure: Option<Vec<u32>>,
    pub source: RowSource,
    pub fetched_at: String,
}

impl CurveDataRow {
    pub fn model(&self) -> Result<WeierstrassModel, DataError> {
        WeierstrassModel::new(self.ainvs.clone()).map_err(|e| DataError::Validation(format!("{}: {e}", self.label)))
    }

    /// Checks that need no curve arithmetic beyond the discriminant.
    pub fn check(&self) -> Result<(), DataError> {
        self.model()?;
        let bad = |what: &str, v: &BigInt| DataError::Validation(format!("{}: {what} = {v}", self.label));
        if !self.conductor.is_positive() {
            return Err(bad("conductor", &self.conductor));
        }
        if let Some(m) = self.moddeg.as_ref().filter(|m| !m.is_positive()) {
            return Err(bad("modular degree", m));
        }
        // The Manin constant is a positive integer.
        if let Some(c) = self.manin.as_ref().filter(|c| *c < &BigInt::one()) {
            return Err(bad("Manin constant", c));
        }
        Ok(())
    }

    /// 2-rank of the torsion subgroup recorded in the row.
    pub fn torsion_two_rank(&self) -> Option<u8> {
        self.torsion_structure.as_ref().map(|t| t.iter().filter(|n| *n % 2 == 0).count() as u8)
    }

    /// Computes the curve's local data and attaches the ingested invariants.
    pub fn to_record(&self) -> Result<CurveRecord, DataError> {
        self.check()?;
        let hints = crate::arith::factorize(&self.conductor)
            .map(|f| f.primes().cloned().collect::<Vec<_>>())
            .unwrap_or_default();
        let mut rec = CurveRecord::from_model_with(&self.model()?, &hints)?.with_label(self.label.clone());
        let sourced = |v: &BigInt| Sourced::new(v.clone(), self.source.into(), Some(self.fetched_at.clone()));
        if let Some(m) = &self.moddeg {
            rec = rec.with_moddeg(sourced(m));
        }
        if let Some(c) = &self.manin {
            rec = rec.with_manin(sourced(c))?;
        }
        if let Some(r) = self.rank {
            rec = rec.with_rank(Sourced::new(r, self.source.into(), Some(self.fetched_at.clone())));
        }
        Ok(rec)
    }

    pub fn with_source(mut self, source: RowSource) -> Self {
        self.source = source;
        self
    }
}

/// A field whose ingested value disagrees with local computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub field: &'static str,
    pub ingested: String,
    pub computed: String,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ingested {}, computed {}", self.field, self.ingested, self.computed)
    }
}

/// Compares the row's a-invariants, conductor and torsion 2-rank with a
/// locally computed record. Empty means consistent.
pub fn validate_row(row: &CurveDataRow, local: &CurveRecord) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    let computed = local.minimal_model.ainvs();
    if &row.ainvs != computed {
        let show = |a: &[BigInt; 5]| format!("[{},{},{},{},{}]", a[0], a[1], a[2], a[3], a[4]);
        out.push(Discrepancy {
            field: "ainvs",
            ingested: show(&row.ainvs),
            computed: show(computed),
        });
    }
    if &row.conductor != local.conductor.value() {
        out.push(Discrepancy {
            field: "conductor",
            ingested: row.conductor.to_string(),
            computed: local.conductor.value().to_string(),
        });
    }
    if let Some(r) = row.torsion_two_rank().filter(|r| *r != local.two_torsion_rank) {
        out.push(Discrepancy {
            field: "torsion_structure",
            ingested: format!("2-rank {r}"),
            computed: format!("2-rank {}", local.two_torsion_rank),
        });
    }
    out
}

#[derive(Serialize)]
struct LineOut<'a> {
    row: &'a RawValue,
    checksum: String,
}

#[derive(Deserialize)]
struct LineIn<'a> {
    #[serde(borrow)]
    row: &'a RawValue,
    checksum: String,
}

fn digest(bytes: &str) -> String {
    hex::encode(Sha256::digest(bytes.as_bytes()))
}

/// `{"row":<row>,"checksum":<sha256 of the row's bytes>}`.
pub(crate) fn encode_line(row: &CurveDataRow) -> String {
    let body = serde_json::to_string(row).expect("rows serialize");
    let raw = RawValue::from_string(body).expect("valid JSON");
    let checksum = digest(raw.get());
    serde_json::to_string(&LineOut { row: &raw, checksum }).expect("lines serialize")
}

/// Inverse of [`encode_line`]; `offset` is the line's byte offset, for errors.
pub(crate) fn decode_line(line: &str, offset: u64) -> Result<CurveDataRow, DataError> {
    let corrupt = |reason: String| DataError::CorruptCache { offset, reason };
    let parsed: LineIn = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
    if digest(parsed.row.get()) != parsed.checksum {
        return Err(corrupt("checksum mismatch".into()));
    }
    serde_json::from_str(parsed.row.get()).map_err(|e| corrupt(e.to_string()))
}

/// Decodes a whole JSON-lines document, skipping blank lines.
pub(crate) fn decode_lines(text: &str) -> Result<Vec<CurveDataRow>, DataError> {
    let mut offset = 0u64;
    let mut rows = Vec::new();
    for line in text.split_inclusive('\n') {
        let body = line.trim_end_matches(['\n', '\r']);
        if !body.trim().is_empty() {
            rows.push(decode_line(body, offset)?);
        }
        offset += line.len() as u64;
    }
    Ok(rows)
}

mod decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod opt_decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

mod decimal_array {
    use num_bigint::BigInt;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt; 5], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(5))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[BigInt; 5], D::Error> {
        let v = <[String; 5]>::deserialize(d)?;
        let mut out: [BigInt; 5] = Default::default();
        for (slot, s) in out.iter_mut().zip(v) {
            *slot = s.parse().map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}
