//! Deterministic report serialization.
//!
//! Reports are plain value trees. Map keys are kept sorted and reals are
//! always rendered with six decimals, so two runs over the same inputs
//! produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

/// Number of decimals used for every real in serialized output.
pub const REAL_DECIMALS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub enum ReportValue {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    List(Vec<ReportValue>),
    Map(BTreeMap<String, ReportValue>),
}

impl ReportValue {
    pub fn map() -> Self {
        ReportValue::Map(BTreeMap::new())
    }

    /// Inserts into a map value. Panics on non-map values.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<ReportValue>) {
        match self {
            ReportValue::Map(m) => {
                m.insert(key.into(), value.into());
            }
            _ => panic!("insert on non-map report value"),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<ReportValue>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        match self {
            ReportValue::Map(m) => m.get(key),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            ReportValue::Real(x) => Some(x),
            ReportValue::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ReportValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[ReportValue]> {
        match self {
            ReportValue::List(v) => Some(v),
            _ => None,
        }
    }
}

impl From<f64> for ReportValue {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            ReportValue::Real(x)
        } else {
            ReportValue::Null
        }
    }
}

impl From<Option<f64>> for ReportValue {
    fn from(x: Option<f64>) -> Self {
        x.map_or(ReportValue::Null, ReportValue::from)
    }
}

impl From<i64> for ReportValue {
    fn from(x: i64) -> Self {
        ReportValue::Int(x)
    }
}

impl From<usize> for ReportValue {
    fn from(x: usize) -> Self {
        ReportValue::Int(x as i64)
    }
}

impl From<u64> for ReportValue {
    fn from(x: u64) -> Self {
        ReportValue::Int(x as i64)
    }
}

impl From<bool> for ReportValue {
    fn from(x: bool) -> Self {
        ReportValue::Bool(x)
    }
}

impl From<&str> for ReportValue {
    fn from(x: &str) -> Self {
        ReportValue::Text(x.to_string())
    }
}

impl From<String> for ReportValue {
    fn from(x: String) -> Self {
        ReportValue::Text(x)
    }
}

impl<T: Into<ReportValue>> From<Vec<T>> for ReportValue {
    fn from(v: Vec<T>) -> Self {
        ReportValue::List(v.into_iter().map(Into::into).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// Indented JSON.
    Structured,
    /// Two-column `path,value` CSV, one leaf per row.
    Delimited,
}

pub fn format_real(x: f64) -> String {
    let s = format!("{x:.REAL_DECIMALS$}");
    // avoid "-0.000000"
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn render_report(report: &ReportValue, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => {
            let mut out = String::new();
            render_json(report, 0, &mut out);
            out.push('\n');
            out
        }
        ReportFormat::Delimited => {
            let mut rows = Vec::new();
            flatten(report, String::new(), &mut rows);
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["path", "value"]).expect("in-memory write");
            for (p, v) in rows {
                wtr.write_record([p, v]).expect("in-memory write");
            }
            String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    }
}

pub fn write_report<W: Write>(mut out: W, report: &ReportValue, format: ReportFormat) -> Result<()> {
    out.write_all(render_report(report, format).as_bytes())
        .map_err(|e| Error::io("writing report", e))
}

fn render_json(v: &ReportValue, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        ReportValue::Null => out.push_str("null"),
        ReportValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ReportValue::Int(i) => {
            let _ = write!(out, "{i}");
        }
        ReportValue::Real(x) => out.push_str(&format_real(*x)),
        ReportValue::Text(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"))
        }
        ReportValue::List(items) if items.is_empty() => out.push_str("[]"),
        ReportValue::List(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                render_json(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        ReportValue::Map(m) if m.is_empty() => out.push_str("{}"),
        ReportValue::Map(m) => {
            out.push_str("{\n");
            for (i, (k, item)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("string serializes"));
                out.push_str(": ");
                render_json(item, indent + 1, out);
                if i + 1 < m.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

fn flatten(v: &ReportValue, path: String, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        ReportValue::Null => rows.push((path, String::new())),
        ReportValue::Bool(b) => rows.push((path, b.to_string())),
        ReportValue::Int(i) => rows.push((path, i.to_string())),
        ReportValue::Real(x) => rows.push((path, format_real(*x))),
        ReportValue::Text(s) => rows.push((path, s.clone())),
        ReportValue::List(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(item, join(&i.to_string()), rows);
            }
        }
        ReportValue::Map(m) => {
            for (k, item) in m {
                flatten(item, join(k), rows);
            }
        }
    }
}

/// Parses a structured report. Numbers written with a decimal point come
/// back as reals, integers as integers.
pub fn parse_report(text: &str) -> Result<ReportValue> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::schema(e.line(), e.to_string()))?;
    Ok(from_json(v))
}

fn from_json(v: serde_json::Value) -> ReportValue {
    use serde_json::Value;
    match v {
        Value::Null => ReportValue::Null,
        Value::Bool(b) => ReportValue::Bool(b),
        Value::Number(n) => match n.as_i64() {
            Some(i) if !n.to_string().contains(['.', 'e', 'E']) => ReportValue::Int(i),
            _ => ReportValue::Real(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => ReportValue::Text(s),
        Value::Array(a) => ReportValue::List(a.into_iter().map(from_json).collect()),
        Value::Object(o) => ReportValue::Map(o.into_iter().map(|(k, v)| (k, from_json(v))).collect()),
    }
}

/// A flat table of cells for plot-ready CSV output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DelimitedTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<ReportValue>>,
}

impl DelimitedTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        DelimitedTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<ReportValue>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut wtr = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(Vec::new());
        wtr.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell_text).collect();
            wtr.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

fn cell_text(v: &ReportValue) -> String {
    match v {
        ReportValue::Null => String::new(),
        ReportValue::Bool(b) => b.to_string(),
        ReportValue::Int(i) => i.to_string(),
        ReportValue::Real(x) => format_real(*x),
        ReportValue::Text(s) => s.clone(),
        other => render_report(other, ReportFormat::Structured).trim().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportValue {
        ReportValue::map()
            .with("zeta", 1.5)
            .with("alpha", ReportValue::map().with("n", 3usize).with("x", 0.25))
            .with("undefined", ReportValue::Null)
            .with("list", vec![ReportValue::from("a"), ReportValue::from(-2.0)])
            .with("flag", true)
    }

    #[test]
    fn deterministic_and_sorted() {
        let r = sample();
        let a = render_report(&r, ReportFormat::Structured);
        let b = render_report(&r, ReportFormat::Structured);
        assert_eq!(a, b);
        assert!(a.find("\"alpha\"").unwrap() < a.find("\"zeta\"").unwrap());
        assert!(a.contains("1.500000"));
        assert!(a.contains("-2.000000"));
    }

    #[test]
    fn empty_report_is_valid() {
        let s = render_report(&ReportValue::map(), ReportFormat::Structured);
        assert_eq!(s, "{}\n");
        assert_eq!(parse_report(&s).unwrap(), ReportValue::map());
        let d = render_report(&ReportValue::map(), ReportFormat::Delimited);
        assert_eq!(d, "path,value\n");
    }

    #[test]
    fn round_trip() {
        let r = sample();
        let back = parse_report(&render_report(&r, ReportFormat::Structured)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn delimited_flattens_paths() {
        let d = render_report(&sample(), ReportFormat::Delimited);
        assert!(d.contains("alpha.x,0.250000\n"));
        assert!(d.contains("list.0,a\n"));
        assert!(d.contains("undefined,\n"));
    }

    #[test]
    fn negative_zero_rendered_as_zero() {
        assert_eq!(format_real(-0.0), "0.000000");
        assert_eq!(format_real(-1e-9), "0.000000");
        assert_eq!(format_real(-0.5), "-0.500000");
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(ReportValue::from(f64::NAN), ReportValue::Null);
    }
}
