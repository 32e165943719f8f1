//! JSON-lines records with an RFC-4180 CSV twin of the tabular rows.
//!
//! CSV cells are rendered from the same `serde_json::Value`s that go into the
//! JSON lines, so both files carry identical numeric text.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Output {
    pub table: String,
    pub columns: Vec<String>,
    records: Vec<Value>,
    rows: Vec<Vec<Value>>,
    pub partial: bool,
}

pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn tagged(kind: &str, body: Value) -> Value {
    let mut obj = Map::new();
    obj.insert("record".into(), Value::String(kind.into()));
    match body {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("value".into(), other);
        }
    }
    Value::Object(obj)
}

impl Output {
    pub fn new(table: &str, columns: &[&str]) -> Output {
        Output {
            table: table.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Output::default()
        }
    }

    /// A non-tabular JSON-lines record.
    pub fn record(&mut self, kind: &str, body: Value) {
        self.records.push(tagged(kind, body));
    }

    /// A table row; also written as a JSON-lines record of kind `table`.
    pub fn row(&mut self, values: Vec<Value>) {
        assert_eq!(values.len(), self.columns.len(), "row width");
        let obj: Map<String, Value> = self.columns.iter().cloned().zip(values.iter().cloned()).collect();
        self.records.push(tagged(&self.table, Value::Object(obj)));
        self.rows.push(values);
    }

    pub fn skip(&mut self, body: Value) {
        self.partial = true;
        self.record("skip", body);
    }

    pub fn records(&self) -> &[Value] {
        &self.records
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    /// Writes `<stem>.jsonl`, plus `<stem>.csv` when there is a table.
    pub fn write(&self, dir: &Path, stem: &str, header: &Value) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let jsonl = dir.join(format!("{stem}.jsonl"));
        let mut text = String::new();
        for r in std::iter::once(header).chain(&self.records) {
            text.push_str(&serde_json::to_string(r).expect("json"));
            text.push('\n');
        }
        fs::File::create(&jsonl)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|e| CliError::io(&jsonl, e))?;
        let mut written = vec![jsonl];
        if !self.columns.is_empty() {
            let path = dir.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row.iter().map(csv_cell))?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rows_become_records_and_cells() {
        let mut o = Output::new("t", &["a", "b"]);
        o.row(vec![json!(0.1), json!("x, y")]);
        o.record("note", json!({"text": "hi"}));
        assert_eq!(o.records()[0], json!({"record": "t", "a": 0.1, "b": "x, y"}));
        assert_eq!(o.records()[1]["record"], "note");
        assert_eq!(csv_cell(&json!(0.1)), "0.1");
        assert_eq!(csv_cell(&Value::Null), "");
        assert!(!o.partial);
    }
}
