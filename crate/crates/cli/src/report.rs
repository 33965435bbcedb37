use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

/// A plain-text report with a JSON twin holding the same fields.
///
/// Both forms are built in insertion order and contain nothing that depends
/// on the environment, so identical inputs give byte-identical output.
pub struct Report {
    text: String,
    json: Map<String, Value>,
    warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        let mut json = Map::new();
        json.insert("command".into(), Value::from(command));
        Report {
            text: format!("lpvlft {command}\n"),
            json,
            warnings: Vec::new(),
        }
    }

    /// Adds one field; `shown` is the text rendering of `value`.
    pub fn field(&mut self, key: &str, shown: impl std::fmt::Display, value: impl Into<Value>) {
        let _ = writeln!(self.text, "  {:<28} {shown}", key);
        self.json.insert(key.into(), value.into());
    }

    /// Adds a field that only appears in the JSON twin.
    pub fn data(&mut self, key: &str, value: impl Into<Value>) {
        self.json.insert(key.into(), value.into());
    }

    /// Adds free text (a matrix, a witness) under a heading.
    pub fn block(&mut self, heading: &str, body: &str) {
        let _ = writeln!(self.text, "  {heading}:");
        for line in body.lines() {
            let _ = writeln!(self.text, "    {line}");
        }
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    pub fn verdict(&mut self, ok: bool, text: &str) {
        let _ = writeln!(self.text, "  {:<28} {text}", "verdict");
        self.json.insert("verdict".into(), Value::from(ok));
    }

    pub fn text(&self) -> String {
        let mut out = self.text.clone();
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        out
    }

    pub fn json(&self) -> String {
        let mut map = self.json.clone();
        map.insert("warnings".into(), Value::from(self.warnings.clone()));
        lpvlft::format::to_pretty_json(&Value::Object(map))
    }

    pub fn emit(&self, json_path: Option<&Path>) -> std::io::Result<()> {
        print!("{}", self.text());
        if let Some(path) = json_path {
            std::fs::write(path, self.json())?;
        }
        Ok(())
    }
}

/// Scientific notation with four significant digits, `inf` for infinities.
pub fn sci(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.3e}")
    }
}

/// JSON value for a float; infinities become strings since JSON has none.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::from(sci(v))
    }
}

pub fn dims(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|d| d.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

pub fn matrix(m: &nalgebra::DMatrix<f64>) -> String {
    if m.nrows() == 0 || m.ncols() == 0 {
        return format!("({}x{} empty)", m.nrows(), m.ncols());
    }
    (0..m.nrows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|v| format!("{:>12.6}", if v.abs() < 5e-7 { 0.0 } else { *v }))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn matrix_value(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::from(lpvlft::format::matrix_to_rows(m))
}
