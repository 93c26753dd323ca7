//! CSV and JSON emission. Output is buffered and written once, so a failed
//! run leaves no partial file behind.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::OutputConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    /// One JSON document.
    Json,
    /// One JSON object per line.
    JsonLines,
}

impl Format {
    fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            "jsonl" | "json-lines" | "json_lines" | "ndjson" => Some(Self::JsonLines),
            _ => None,
        }
    }

    fn from_extension(path: &std::path::Path) -> Option<Self> {
        path.extension().and_then(|e| e.to_str()).and_then(Self::from_name)
    }
}

pub struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    /// `--out` wins over the config. A bare format name selects stdout.
    pub fn resolve(out: Option<&str>, cfg: Option<&OutputConfig>, default: Format) -> Result<Self> {
        if let Some(out) = out {
            if out.is_empty() {
                bail!("--out is empty");
            }
            if let Some(format) = Format::from_name(out) {
                return Ok(Self { path: None, format });
            }
            let path = PathBuf::from(out);
            let format = Format::from_extension(&path).unwrap_or(default);
            return Ok(Self { path: Some(path), format });
        }
        let cfg = cfg.cloned().unwrap_or_default();
        let format = cfg.format.or_else(|| cfg.path.as_deref().and_then(Format::from_extension)).unwrap_or(default);
        Ok(Self { path: cfg.path, format })
    }

    pub fn open(&self, digest: &str) -> Result<Table<'_>> {
        Ok(Table { sink: self, digest: digest.to_string(), columns: Vec::new(), rows: Vec::new() })
    }

    pub fn write_all(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

/// Rows with named columns, rendered in the sink's format.
pub struct Table<'a> {
    sink: &'a Sink,
    digest: String,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Numbers and booleans become JSON scalars; everything else stays a string.
fn typed(field: &str) -> Value {
    if field.is_empty() {
        return Value::Null;
    }
    match serde_json::from_str::<Value>(field) {
        Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
        _ => Value::String(field.to_string()),
    }
}

impl Table<'_> {
    pub fn header(&mut self, columns: &[&str]) -> Result<()> {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        Ok(())
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        if fields.len() != self.columns.len() {
            bail!("row has {} fields, header has {}", fields.len(), self.columns.len());
        }
        self.rows.push(fields.iter().map(|f| typed(f.as_ref())).collect());
        Ok(())
    }

    /// Adds a serializable record; its field names become the columns.
    pub fn record<T: Serialize>(&mut self, rec: &T) -> Result<()> {
        let Value::Object(map) = serde_json::to_value(rec)? else {
            bail!("records must serialize to objects");
        };
        if self.columns.is_empty() {
            self.columns = map.keys().cloned().collect();
        }
        let row = self.columns.iter().map(|c| map.get(c).cloned().unwrap_or(Value::Null)).collect();
        self.rows.push(row);
        Ok(())
    }

    fn object(&self, row: &[Value]) -> Map<String, Value> {
        self.columns.iter().cloned().zip(row.iter().cloned()).collect()
    }

    pub fn finish(self) -> Result<()> {
        let mut text = String::new();
        match self.sink.format {
            Format::Csv => {
                text.push_str(&format!("# config_digest={}\n", self.digest));
                text.push_str(&self.columns.join(","));
                text.push('\n');
                for r in &self.rows {
                    let line: Vec<String> = r.iter().map(csv_field).collect();
                    text.push_str(&line.join(","));
                    text.push('\n');
                }
            }
            Format::JsonLines => {
                for r in &self.rows {
                    let mut obj = self.object(r);
                    obj.insert("config_digest".into(), Value::String(self.digest.clone()));
                    text.push_str(&serde_json::to_string(&obj)?);
                    text.push('\n');
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Object(self.object(r))).collect();
                let doc = serde_json::json!({ "config_digest": self.digest, "rows": rows });
                text.push_str(&serde_json::to_string_pretty(&doc)?);
                text.push('\n');
            }
        }
        self.sink.write_all(&text)
    }
}
