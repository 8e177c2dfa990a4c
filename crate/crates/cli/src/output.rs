//! CSV tables with a config header line and fixed-precision numbers.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::CliError;

pub const FORMAT_VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Int(i) => i as f64,
            Cell::Float(v) => v,
        }
    }
}

/// Nine significant digits in scientific notation; `-0` prints as `0`.
pub fn format_float(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }

    /// Largest absolute difference over the floating-point cells of two
    /// tables of the same shape, with the column where it occurs.
    pub fn max_deviation(&self, other: &Table) -> Option<(f64, &'static str)> {
        if self.columns != other.columns || self.rows.len() != other.rows.len() {
            return None;
        }
        let mut best = (0.0, "");
        for (a, b) in self.rows.iter().zip(&other.rows) {
            for (j, (x, y)) in a.iter().zip(b).enumerate() {
                if let (Cell::Float(x), Cell::Float(y)) = (x, y) {
                    let d = (x - y).abs();
                    if d > best.0 || best.1.is_empty() {
                        best = (d.max(best.0), self.columns[j]);
                    }
                }
            }
        }
        Some(best)
    }

    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::new();
        out.push_str(header);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match *c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(v) => format_float(v),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `# catpump v1 command=<name> section.key=value ...` with keys sorted.
pub fn header(command: &str, sections: &[(&str, toml::Value)]) -> String {
    let mut pairs = Vec::new();
    for (name, value) in sections {
        flatten(name, value, &mut pairs);
    }
    pairs.sort();
    let mut line = format!("# catpump {FORMAT_VERSION} command={command}");
    for (k, v) in pairs {
        let _ = write!(line, " {k}={v}");
    }
    line
}

pub fn section<T: Serialize>(name: &str, value: &T) -> Result<toml::Value, CliError> {
    toml::Value::try_from(value).map_err(|e| CliError::config(name, e.to_string()))
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(value: &toml::Value) -> String {
    match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        // shortest representation that round-trips
        toml::Value::Float(f) => format!("{f:?}"),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(a) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            format!("[{}]", items.join(","))
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(1.0), "1.00000000e0");
        assert_eq!(format_float(-0.0), "0.00000000e0");
        assert_eq!(format_float(0.123456789123), "1.23456789e-1");
        assert_eq!(format_float(-2.5e-12), "-2.50000000e-12");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a", "n"]);
        t.rows.push(vec![Cell::Float(0.5), Cell::Int(3)]);
        assert_eq!(t.to_csv("# h"), "# h\na,n\n5.00000000e-1,3\n");
    }

    #[test]
    fn deviation_skips_integer_columns() {
        let mut a = Table::new(vec!["f", "n"]);
        a.rows.push(vec![Cell::Float(0.5), Cell::Int(3)]);
        let mut b = a.clone();
        b.rows[0] = vec![Cell::Float(0.25), Cell::Int(9)];
        assert_eq!(a.max_deviation(&b), Some((0.25, "f")));
        b.rows.clear();
        assert_eq!(a.max_deviation(&b), None);
    }

    #[test]
    fn header_is_sorted_and_flat() {
        #[derive(Serialize)]
        struct S {
            z: f64,
            a: Vec<f64>,
            m: Option<f64>,
        }
        let s = S { z: 0.1, a: vec![1.0, 2.5], m: None };
        let h = header("demo", &[("sec", section("sec", &s).unwrap())]);
        assert_eq!(h, "# catpump v1 command=demo sec.a=[1.0,2.5] sec.z=0.1");
    }
}
