//! Client for the LMFDB elliptic curve API.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde_json::{Map, Value};

use super::row::{CurveDataRow, RowSource};
use super::DataError;

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org/api/ec_curvedata/";
pub const DEFAULT_DELAY: Duration = Duration::from_millis(1000);
const TIMEOUT: Duration = Duration::from_secs(30);
const MAX_PAGES: usize = 50;

/// Fields every response row must carry. Extra fields are ignored.
pub const REQUIRED_FIELDS: [&str; 6] = ["ainvs", "conductor", "degree", "manin_constant", "rank", "torsion_structure"];

/// Issues one request at a time, at least `delay` apart.
#[derive(Debug)]
pub struct LmfdbClient {
    base_url: String,
    delay: Duration,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

impl LmfdbClient {
    pub fn new(base_url: impl Into<String>, delay: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(TIMEOUT))
            .user_agent(concat!("watkins/", env!("CARGO_PKG_VERSION")))
            .build();
        Self {
            base_url: base_url.into(),
            delay,
            agent: ureq::Agent::new_with_config(config),
            last_request: Mutex::new(None),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// Rows for a Cremona (`11a3`) or LMFDB (`11.a2`) label.
    pub fn by_label(&self, label: &str) -> Result<Vec<CurveDataRow>, DataError> {
        let field = if label.contains('.') { "lmfdb_label" } else { "Clabel" };
        let rows = self.query(&[(field, label.to_string())])?;
        if rows.is_empty() {
            return Err(DataError::NotFound(label.to_string()));
        }
        Ok(rows)
    }

    /// All curves of conductor `n`.
    pub fn by_conductor(&self, n: u64) -> Result<Vec<CurveDataRow>, DataError> {
        self.query(&[("conductor", format!("i{n}"))])
    }

    fn query(&self, params: &[(&str, String)]) -> Result<Vec<CurveDataRow>, DataError> {
        let mut rows = Vec::new();
        let mut offset = 0usize;
        for _ in 0..MAX_PAGES {
            let page = self.get(params, offset)?;
            let data = page
                .get("data")
                .and_then(Value::as_array)
                .ok_or_else(|| DataError::SchemaMismatch("response has no `data` array".into()))?;
            let fetched_at = now();
            for item in data {
                rows.push(parse_remote_row(item, &fetched_at)?);
            }
            offset += data.len();
            let more = page.get("next").is_some_and(|n| !n.is_null());
            if !more || data.is_empty() {
                break;
            }
        }
        Ok(rows)
    }

    fn get(&self, params: &[(&str, String)], offset: usize) -> Result<Value, DataError> {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = *last {
            let elapsed = t.elapsed();
            if elapsed < self.delay {
                std::thread::sleep(self.delay - elapsed);
            }
        }
        let mut req = self.agent.get(&self.base_url).query("_format", "json");
        for (k, v) in params {
            req = req.query(*k, v);
        }
        if offset > 0 {
            req = req.query("_offset", offset.to_string());
        }
        let result = req.call();
        *last = Some(Instant::now());
        let mut resp = result.map_err(|e| DataError::Network(e.to_string()))?;
        let body = resp.body_mut().read_to_string().map_err(|e| DataError::Network(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| DataError::SchemaMismatch(format!("response is not JSON: {e}")))
    }
}

pub(crate) fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn integer(v: &Value, field: &str) -> Result<BigInt, DataError> {
    let bad = || DataError::SchemaMismatch(format!("`{field}` is not an integer: {v}"));
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string().parse().map_err(|_| bad()),
        Value::String(s) => s.trim().parse().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn optional_integer(obj: &Map<String, Value>, field: &str) -> Result<Option<BigInt>, DataError> {
    match &obj[field] {
        Value::Null => Ok(None),
        v => integer(v, field).map(Some),
    }
}

fn small(v: BigInt, field: &str) -> Result<u32, DataError> {
    u32::try_from(&v).map_err(|_| DataError::SchemaMismatch(format!("`{field}` out of range: {v}")))
}

/// One element of the API's `data` array.
pub fn parse_remote_row(item: &Value, fetched_at: &str) -> Result<CurveDataRow, DataError> {
    let obj = item.as_object().ok_or_else(|| DataError::SchemaMismatch("row is not an object".into()))?;
    if let Some(missing) = REQUIRED_FIELDS.iter().find(|f| !obj.contains_key(**f)) {
        return Err(DataError::SchemaMismatch(format!("missing field `{missing}`")));
    }
    let label = ["Clabel", "lmfdb_label"]
        .iter()
        .find_map(|k| obj.get(*k).and_then(Value::as_str))
        .ok_or_else(|| DataError::SchemaMismatch("missing field `Clabel` or `lmfdb_label`".into()))?
        .to_string();

    let ainvs_json = obj["ainvs"]
        .as_array()
        .filter(|a| a.len() == 5)
        .ok_or_else(|| DataError::SchemaMismatch("`ainvs` is not a list of five integers".into()))?;
    let mut ainvs: [BigInt; 5] = Default::default();
    for (slot, v) in ainvs.iter_mut().zip(ainvs_json) {
        *slot = integer(v, "ainvs")?;
    }
    let rank = optional_integer(obj, "rank")?.map(|r| small(r, "rank")).transpose()?;
    let torsion_structure = match &obj["torsion_structure"] {
        Value::Null => None,
        Value::Array(items) => Some(
            items
                .iter()
                .map(|v| small(integer(v, "torsion_structure")?, "torsion_structure"))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        other => return Err(DataError::SchemaMismatch(format!("`torsion_structure` is not a list: {other}"))),
    };
    let row = CurveDataRow {
        label,
        ainvs,
        conductor: integer(&obj["conductor"], "conductor")?,
        moddeg: optional_integer(obj, "degree")?,
        manin: optional_integer(obj, "manin_constant")?,
        rank,
        torsion_structure,
        source: RowSource::Remote,
        fetched_at: fetched_at.to_string(),
    };
    row.check()?;
    Ok(row)
}
