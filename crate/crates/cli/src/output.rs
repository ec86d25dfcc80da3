//! CSV and JSON rendering.
//!
//! CSV floats use `{:.16e}` so every value survives a text round trip
//! bit for bit. JSON is one line with object keys in lexicographic order
//! (serde_json's default map is a `BTreeMap`).

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Numeric table with an optional metadata footer.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
    pub meta: Map<String, Value>,
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Single-line JSON, sorted keys, trailing newline.
pub fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        if !self.meta.is_empty() {
            out.push_str("# ");
            out.push_str(&json_line(&Value::Object(self.meta.clone())));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.header.iter().zip(row).map(|(k, &v)| (k.to_string(), Value::from(v))).collect();
                Value::Object(obj)
            })
            .collect();
        let mut obj = self.meta.clone();
        obj.insert("rows".into(), Value::Array(rows));
        json_line(&Value::Object(obj))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}
