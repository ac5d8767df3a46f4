use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::TOOL_VERSION;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::Int(v as u64)
    }
}

/// Rows in insertion order, written as CSV plus a JSON mirror.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Writes `<stem>.csv` and `<stem>.json` under `dir`.
    pub fn write(&self, dir: &Path, stem: &str, config_hash: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        let doc = json!({
            "tool_version": TOOL_VERSION,
            "config_hash": config_hash,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        fs::write(dir.join(format!("{stem}.json")), text)
    }
}

/// Per-point results under `<out>/cache`, keyed by tool version, config hash
/// and point.
pub struct Cache {
    dir: Option<PathBuf>,
    config_hash: String,
}

impl Cache {
    pub fn new(out: &Path, config_hash: &str, enabled: bool) -> Self {
        Cache { dir: enabled.then(|| out.join("cache")), config_hash: config_hash.into() }
    }

    fn path(&self, point: &str) -> Option<PathBuf> {
        let key = Sha256::digest(format!("{TOOL_VERSION}\n{}\n{point}", self.config_hash).as_bytes());
        self.dir.as_ref().map(|d| d.join(format!("{}.json", hex::encode(key))))
    }

    pub fn get<T: DeserializeOwned>(&self, point: &str) -> Option<T> {
        let text = fs::read_to_string(self.path(point)?).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Best effort: a cache that cannot be written is skipped.
    pub fn put<T: Serialize>(&self, point: &str, value: &T) {
        let Some(path) = self.path(point) else { return };
        if let (Some(parent), Ok(text)) = (path.parent(), serde_json::to_string(value)) {
            let _ = fs::create_dir_all(parent).and_then(|_| fs::write(&path, text));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(["a", "b", "c"]);
        t.push(vec![0.1.into(), Cell::Empty, "x".into()]);
        t.write(dir.path(), "t", "h").unwrap();
        let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(csv, "a,b,c\n1.0000000000000001e-1,,x\n");
        let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
        assert_eq!(json["rows"][0][0].as_f64(), Some(0.1));
        assert!(json["rows"][0][1].is_null());
    }

    #[test]
    fn cache_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path(), "h", true);
        let v = [1.0 / 3.0, std::f64::consts::PI * 1e-7];
        cache.put("p", &v);
        assert_eq!(cache.get::<[f64; 2]>("p"), Some(v));
        assert_eq!(cache.get::<[f64; 2]>("q"), None);
        assert_eq!(Cache::new(dir.path(), "other", true).get::<[f64; 2]>("p"), None);
        let off = Cache::new(dir.path(), "h", false);
        assert_eq!(off.get::<[f64; 2]>("p"), None);
    }
}
