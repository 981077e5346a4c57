use crate::config::{Format, RunConfig};
use mutacp::analysis::Extended;
use mutacp::montecarlo::format_sig;
use serde_json::{json, Map, Value};
use std::io::{self, Write};

/// Ordered `name -> value` table, printed as `name,value` lines or as one
/// JSON object.
#[derive(Debug, Default)]
pub struct Table {
    rows: Vec<(String, Value)>,
}

impl Table {
    pub fn push(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.rows.push((key.to_string(), value.into()));
        self
    }

    pub fn extended(&mut self, key: &str, value: Extended) -> &mut Self {
        let v = match value {
            Extended::Finite(x) => json!(x),
            Extended::Infinite => json!("inf"),
        };
        self.push(key, v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::new();
                for (k, v) in &self.rows {
                    s.push_str(&format!("{k},{}\n", cell(v)));
                }
                s
            }
            Format::Json => {
                let map: Map<String, Value> = self.rows.iter().cloned().collect();
                format!("{}\n", Value::Object(map))
            }
        }
    }
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => "empty".into(),
        Value::Number(n) => n
            .as_f64()
            .map_or_else(|| n.to_string(), |x| format_sig(x, 10)),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// Writes to `--out` when given, else standard output.
pub fn emit(cfg: &RunConfig, text: &str) -> io::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}
