//! Ingestion of curve invariants that are never computed locally (modular
//! degree, Manin constant, rank) from the LMFDB, checked-in fixtures and a
//! local cache.
//!
//! Lookups go cache, then fixtures, then the network. Remote rows are
//! validated against local computation before they are cached.

mod cache;
mod fixtures;
mod remote;
mod row;

pub use cache::{Cache, CACHE_DIR_ENV, CACHE_FILE};
pub use fixtures::{fixture_by_ainvs, fixture_by_label, fixture_rows, FIXTURES_JSONL};
pub use remote::{parse_remote_row, LmfdbClient, DEFAULT_BASE_URL, DEFAULT_DELAY, REQUIRED_FIELDS};
pub use row::{validate_row, CurveDataRow, Discrepancy, RowSource};

use std::collections::BTreeMap;
use std::time::Duration;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ecq::EcqError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataError {
    #[error("network error: {0}")]
    Network(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("remote schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("corrupt cache line at byte offset {offset}: {reason}")]
    CorruptCache { offset: u64, reason: String },
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Ecq(#[from] EcqError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveQuery {
    Label(String),
    /// Inclusive conductor range.
    ConductorRange(u64, u64),
}

#[derive(Clone, Debug)]
pub struct ResolverOptions {
    /// Never touch the network.
    pub offline: bool,
    /// `None` disables the cache.
    pub cache_dir: Option<std::path::PathBuf>,
    pub base_url: String,
    pub delay: Duration,
}

impl Default for ResolverOptions {
    fn default() -> Self {
        Self {
            offline: false,
            cache_dir: Some(Cache::default_dir()),
            base_url: DEFAULT_BASE_URL.to_string(),
            delay: DEFAULT_DELAY,
        }
    }
}

/// Answers curve queries from the cache, the fixtures and the LMFDB.
#[derive(Debug)]
pub struct Resolver {
    cache: Option<Cache>,
    client: Option<LmfdbClient>,
}

impl Resolver {
    pub fn new(options: &ResolverOptions) -> Result<Self, DataError> {
        let cache = options.cache_dir.as_deref().map(Cache::open).transpose()?;
        let client = (!options.offline).then(|| LmfdbClient::new(options.base_url.clone(), options.delay));
        Ok(Self { cache, client })
    }

    pub fn cache(&self) -> Option<&Cache> {
        self.cache.as_ref()
    }

    pub fn is_offline(&self) -> bool {
        self.client.is_none()
    }

    pub fn fetch(&self, query: &CurveQuery) -> Result<Vec<CurveDataRow>, DataError> {
        match query {
            CurveQuery::Label(label) => self.by_label(label).map(|r| vec![r]),
            CurveQuery::ConductorRange(lo, hi) => self.by_conductor_range(*lo, *hi),
        }
    }

    pub fn by_label(&self, label: &str) -> Result<CurveDataRow, DataError> {
        if let Some(row) = self.cached(label)? {
            return Ok(row);
        }
        if let Some(row) = fixture_by_label(label) {
            return Ok(row.clone());
        }
        let client = self.client.as_ref().ok_or_else(|| DataError::NotFound(format!("{label} (offline)")))?;
        let rows = client.by_label(label)?;
        let row = rows.into_iter().next().expect("by_label returns at least one row");
        self.accept(&row)?;
        Ok(row)
    }

    /// Local rows (cache, then fixtures) with the given reduced minimal
    /// a-invariants. Never uses the network.
    pub fn by_ainvs(&self, ainvs: &[BigInt; 5]) -> Result<Option<CurveDataRow>, DataError> {
        if let Some(cache) = &self.cache {
            if let Some(row) = cache.load()?.into_iter().rev().find(|r| &r.ainvs == ainvs) {
                return Ok(Some(row.with_source(RowSource::Cache)));
            }
        }
        Ok(fixture_by_ainvs(ainvs).cloned())
    }

    /// Offline: every local row in range. Online: one remote query per
    /// conductor, each row validated and cached.
    pub fn by_conductor_range(&self, lo: u64, hi: u64) -> Result<Vec<CurveDataRow>, DataError> {
        let Some(client) = &self.client else {
            let mut by_label = BTreeMap::new();
            for row in fixture_rows() {
                by_label.insert(row.label.clone(), row.clone());
            }
            if let Some(cache) = &self.cache {
                for row in cache.load()? {
                    by_label.insert(row.label.clone(), row.with_source(RowSource::Cache));
                }
            }
            let mut rows: Vec<_> = by_label
                .into_values()
                .filter(|r| r.conductor >= BigInt::from(lo) && r.conductor <= BigInt::from(hi))
                .collect();
            if rows.is_empty() {
                return Err(DataError::NotFound(format!("conductors {lo}..{hi} (offline)")));
            }
            rows.sort_by(|a, b| (&a.conductor, &a.label).cmp(&(&b.conductor, &b.label)));
            return Ok(rows);
        };
        let mut rows = Vec::new();
        for n in lo..=hi {
            for row in client.by_conductor(n)? {
                self.accept(&row)?;
                rows.push(row);
            }
        }
        Ok(rows)
    }

    fn cached(&self, label: &str) -> Result<Option<CurveDataRow>, DataError> {
        match &self.cache {
            Some(c) => Ok(c.get(label)?.map(|r| r.with_source(RowSource::Cache))),
            None => Ok(None),
        }
    }

    /// Validates a remote row against local computation and any local copy,
    /// then writes it through to the cache.
    fn accept(&self, row: &CurveDataRow) -> Result<(), DataError> {
        let local = row.to_record()?;
        let mut problems = validate_row(row, &local);
        let known = match self.cached(&row.label)? {
            Some(r) => Some(r),
            None => fixture_by_label(&row.label).cloned(),
        };
        if let Some(k) = known.filter(|k| k.conductor != row.conductor) {
            problems.push(Discrepancy {
                field: "conductor",
                ingested: row.conductor.to_string(),
                computed: format!("{} (local copy)", k.conductor),
            });
        }
        if !problems.is_empty() {
            let list: Vec<String> = problems.iter().map(|p| format!("{}: {p}", row.label)).collect();
            return Err(DataError::Validation(list.join("; ")));
        }
        if let Some(cache) = &self.cache {
            cache.put(row)?;
        }
        Ok(())
    }
}

/// One-shot [`Resolver::fetch`].
pub fn fetch_curve(query: &CurveQuery, options: &ResolverOptions) -> Result<Vec<CurveDataRow>, DataError> {
    Resolver::new(options)?.fetch(query)
}

/// Row timestamp format (RFC 3339, UTC, seconds).
pub fn timestamp_now() -> String {
    remote::now()
}
