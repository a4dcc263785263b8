use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::row::{decode_lines, encode_line, CurveDataRow};
use super::DataError;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "WATKINS_CACHE_DIR";
pub const CACHE_FILE: &str = "curves.jsonl";

/// Append-only JSON-lines store of ingested rows, one checksummed row per
/// line. Later lines supersede earlier ones with the same label.
///
/// Readers take a shared file lock and writers an exclusive one.
#[derive(Clone, Debug)]
pub struct Cache {
    path: PathBuf,
}

fn io(e: std::io::Error) -> DataError {
    DataError::Io(e.to_string())
}

impl Cache {
    /// `$WATKINS_CACHE_DIR`, else the platform cache directory.
    pub fn default_dir() -> PathBuf {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => dirs::cache_dir().unwrap_or_else(std::env::temp_dir).join("watkins"),
        }
    }

    /// Opens (creating if needed) the cache in `dir`.
    pub fn open(dir: &Path) -> Result<Self, DataError> {
        fs::create_dir_all(dir).map_err(io)?;
        Ok(Self { path: dir.join(CACHE_FILE) })
    }

    pub fn open_default() -> Result<Self, DataError> {
        Self::open(&Self::default_dir())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Every line in file order, verified.
    pub fn load(&self) -> Result<Vec<CurveDataRow>, DataError> {
        let mut file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io(e)),
        };
        file.lock_shared().map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;
        decode_lines(&text)
    }

    /// The latest row stored under `label`.
    pub fn get(&self, label: &str) -> Result<Option<CurveDataRow>, DataError> {
        Ok(self.load()?.into_iter().rev().find(|r| r.label == label))
    }

    pub fn put(&self, row: &CurveDataRow) -> Result<(), DataError> {
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path).map_err(io)?;
        file.lock().map_err(io)?;
        let mut line = encode_line(row);
        line.push('\n');
        file.write_all(line.as_bytes()).map_err(io)?;
        file.sync_data().map_err(io)
    }

    /// Rewrites the file keeping the latest row per label, in order of first
    /// appearance. Returns the number of rows kept. Refuses to run on a
    /// corrupt file.
    pub fn compact(&self) -> Result<usize, DataError> {
        let mut file = match OpenOptions::new().read(true).write(true).open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(io(e)),
        };
        file.lock().map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;
        let rows = decode_lines(&text)?;
        let mut latest: HashMap<&str, &CurveDataRow> = HashMap::new();
        let mut order = Vec::new();
        for r in &rows {
            if latest.insert(&r.label, r).is_none() {
                order.push(r.label.as_str());
            }
        }
        let tmp = self.path.with_extension("jsonl.tmp");
        let mut out = String::new();
        for label in &order {
            out.push_str(&encode_line(latest[label]));
            out.push('\n');
        }
        fs::write(&tmp, out).map_err(io)?;
        fs::rename(&tmp, &self.path).map_err(io)?;
        Ok(order.len())
    }
}
