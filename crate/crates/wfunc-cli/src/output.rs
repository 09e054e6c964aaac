//! Output emission: CSV ('.' decimal, '\n' line endings, UTF-8) or JSON,
//! to stdout or a file. Every emitted number is checked finite.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bail!("unknown format {other:?} (expected csv or json)"),
        }
    }
}

pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len());
        for v in &row {
            if let Value::Num(x) = v {
                assert!(x.is_finite(), "refusing to emit a non-finite value");
            }
        }
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for c in &self.comments {
                    out.push_str(&format!("# {c}\n"));
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::Num(x) => format!("{x:.12e}"),
                            Value::Int(x) => x.to_string(),
                            Value::Text(s) => s.clone(),
                        })
                        .collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (c, v) in self.columns.iter().zip(row.iter()) {
                            let jv = match v {
                                Value::Num(x) => serde_json::json!(x),
                                Value::Int(x) => serde_json::json!(x),
                                Value::Text(s) => serde_json::json!(s),
                            };
                            obj.insert(c.clone(), jv);
                        }
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({ "meta": self.comments, "rows": rows });
                let mut text = serde_json::to_string_pretty(&doc).unwrap();
                text.push('\n');
                text
            }
        }
    }

    pub fn write(&self, out: &Option<PathBuf>, format: Format) -> Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => {
                std::io::stdout().write_all(text.as_bytes()).context("writing stdout")?;
            }
        }
        Ok(())
    }
}
