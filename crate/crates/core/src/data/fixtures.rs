use std::sync::OnceLock;

use num_bigint::BigInt;

use super::row::{decode_lines, CurveDataRow};

/// The checked-in fixture table, same format as the cache.
pub const FIXTURES_JSONL: &str = include_str!("../../fixtures/curves.jsonl");

/// Parsed fixture rows. Panics if the embedded file is corrupt, which the
/// test suite rules out.
pub fn fixture_rows() -> &'static [CurveDataRow] {
    static ROWS: OnceLock<Vec<CurveDataRow>> = OnceLock::new();
    ROWS.get_or_init(|| decode_lines(FIXTURES_JSONL).expect("embedded fixtures are well formed"))
}

pub fn fixture_by_label(label: &str) -> Option<&'static CurveDataRow> {
    fixture_rows().iter().find(|r| r.label == label)
}

/// The fixture whose (reduced minimal) a-invariants are `ainvs`.
pub fn fixture_by_ainvs(ainvs: &[BigInt; 5]) -> Option<&'static CurveDataRow> {
    fixture_rows().iter().find(|r| &r.ainvs == ainvs)
}
