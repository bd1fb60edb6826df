//! Tables and their CSV/JSON encodings. The JSON form carries the same
//! columns as the CSV header, one object per row.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Debug keeps the shortest round-trip form and switches to
            // exponent notation for very small or large magnitudes
            Cell::Float(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v)
                .map(Json::Number)
                .unwrap_or(Json::Null),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    /// Key/value pairs written as a `# k=v ...` line before the CSV header.
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            meta: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        if !self.meta.is_empty() {
            let meta: Vec<String> = self
                .meta
                .iter()
                .map(|(k, v)| format!("{k}={}", v.render()))
                .collect();
            out.extend_from_slice(format!("# {}\n", meta.join(" ")).as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner()
            .map_err(|e| CliError::Csv(e.into_error().into()))
    }

    pub fn to_json(&self) -> Json {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.to_json()))
                    .collect();
                Json::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        if !self.meta.is_empty() {
            let meta: Map<String, Json> = self
                .meta
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect();
            doc.insert("meta".into(), Json::Object(meta));
        }
        doc.insert("columns".into(), json!(self.columns));
        doc.insert("rows".into(), Json::Array(rows));
        Json::Object(doc)
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.to_json())?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Writes `table` as `<dir>/<name>.<ext>`.
pub fn write_table(dir: &Path, table: &Table, format: Format) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.{}", table.name, format.extension()));
    write_file(&path, &table.encode(format)?)?;
    Ok(path)
}
