//! Tabular output with a fixed, reproducible text encoding.
//!
//! CSV: header row, comma separator, LF line endings, floats printed with 17
//! significant digits in scientific notation (`{:.16e}`), booleans as
//! `true`/`false`. JSON: `{"columns": [...], "rows": [[...], ...]}` with
//! non-finite floats written as `null`.

use std::fmt::Write as _;

use crate::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Normalize −0 so identical physics prints identical bytes.
        let v = if v == 0.0 { 0.0 } else { v };
        format!("{v:.16e}")
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float values of one column; non-float cells are skipped.
    pub fn float_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .filter_map(|r| match r[idx] {
                    Cell::Float(v) => Some(v),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.iter().map(|c| csv_text(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(v) => format_float(*v),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(s) => csv_text(s),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let columns = serde_json::to_string(&self.columns).expect("strings serialize");
        let mut out = String::new();
        let _ = write!(out, "{{\"columns\":{columns},\"rows\":[");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Float(v) if v.is_finite() => out.push_str(&format_float(*v)),
                    Cell::Float(_) => out.push_str("null"),
                    Cell::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
                    Cell::Text(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
                }
            }
            out.push(']');
        }
        out.push_str("]}\n");
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["name", "x", "ok"]);
        t.push(vec!["a,b".into(), 0.1.into(), true.into()]);
        t.push(vec!["c".into(), (-0.0).into(), false.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        assert_eq!(
            csv,
            "name,x,ok\n\"a,b\",1.0000000000000001e-1,true\nc,0.0000000000000000e0,false\n"
        );
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -123456.789, 2f64.sqrt()] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_is_parseable() {
        let text = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["columns"][1], "x");
        assert_eq!(v["rows"][0][1].as_f64().unwrap(), 0.1);
        assert_eq!(v["rows"][1][2], false);
    }
}
