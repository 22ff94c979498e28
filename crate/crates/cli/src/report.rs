//! Tabular reports rendered as CSV or JSON with fixed number formatting, so
//! that the same run always produces the same bytes.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// C-style `%.12e`: twelve mantissa digits, signed exponent of at least two
/// digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent always present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[derive(Clone, Debug)]
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(kind: &'static str, columns: &[&'static str]) -> Self {
        Self { kind, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.kind);
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self { command, tables: Vec::new() }
    }

    pub fn table(&self, kind: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.kind == kind)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// One CSV for all tables: a `kind` column names the table each row
    /// belongs to, and the header is the union of all column names in order
    /// of first appearance. Cells a table does not have are left empty.
    pub fn to_csv(&self) -> String {
        let mut header: Vec<&str> = vec!["kind"];
        for t in &self.tables {
            for c in &t.columns {
                if !header.contains(c) {
                    header.push(c);
                }
            }
        }
        let mut out = header.join(",");
        out.push('\n');
        for t in &self.tables {
            for row in &t.rows {
                let mut cells = vec![String::new(); header.len()];
                cells[0] = t.kind.to_string();
                for (c, v) in t.columns.iter().zip(row) {
                    let i = header.iter().position(|h| h == c).expect("column in header");
                    cells[i] = csv_cell(v);
                }
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// `{"command": ..., "<kind>": [{column: value, ...}, ...], ...}`.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{{\n  \"command\": {}", json_string(self.command));
        for t in &self.tables {
            let _ = write!(out, ",\n  {}: [", json_string(t.kind));
            for (r, row) in t.rows.iter().enumerate() {
                out.push_str(if r == 0 { "\n    {" } else { ",\n    {" });
                for (i, (c, v)) in t.columns.iter().zip(row).enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{}: {}", json_string(c), json_value(v));
                }
                out.push('}');
            }
            out.push_str(if t.rows.is_empty() { "]" } else { "\n  ]" });
        }
        out.push_str("\n}\n");
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Num(x) => sci(*x),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::Str(s) => s.clone(),
        Value::Null => String::new(),
    }
}

fn json_value(v: &Value) -> String {
    match v {
        Value::Num(x) if x.is_finite() => sci(*x),
        Value::Num(_) | Value::Null => "null".into(),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => json_string(s),
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Two-column `x,psi` dump including the zero boundary nodes.
pub fn psi_csv(x: &[f64], psi: &[f64]) -> String {
    let mut out = String::from("x,psi\n");
    for (x, p) in x.iter().zip(psi) {
        let _ = writeln!(out, "{},{}", sci(*x), sci(*p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_matches_printf() {
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(-0.81), "-8.100000000000e-01");
        assert_eq!(sci(1.9496e-10), "1.949600000000e-10");
        assert_eq!(sci(6.02e123), "6.020000000000e+123");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(f64::NAN), "nan");
        assert_eq!(sci(f64::NEG_INFINITY), "-inf");
    }

    fn sample() -> Report {
        let mut r = Report::new("demo");
        let mut a = Table::new("result", &["energy", "iterations", "converged"]);
        a.push(vec![1.5.into(), 3usize.into(), true.into()]);
        let mut b = Table::new("history", &["iteration", "energy"]);
        b.push(vec![1usize.into(), 2.0.into()]);
        b.push(vec![2usize.into(), Value::Null]);
        r.tables = vec![a, b];
        r
    }

    #[test]
    fn csv_uses_union_header() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "kind,energy,iterations,converged,iteration");
        assert_eq!(lines[1], "result,1.500000000000e+00,3,true,");
        assert_eq!(lines[2], "history,2.000000000000e+00,,,1");
        assert_eq!(lines[3], "history,,,,2");
    }

    #[test]
    fn json_layout() {
        let json = sample().to_json();
        assert!(json.starts_with("{\n  \"command\": \"demo\""));
        assert!(json.contains("{\"energy\": 1.500000000000e+00, \"iterations\": 3, \"converged\": true}"));
        assert!(json.contains("{\"iteration\": 2, \"energy\": null}"));
    }

    #[test]
    fn strings_escaped() {
        assert_eq!(json_string("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
        assert_eq!(csv_cell(&Value::Str("a,b".into())), "\"a,b\"");
    }
}
