//! CSV and JSON result tables with fixed `%.12e` number formatting.

use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::run::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Error,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub mode: &'static str,
    /// All columns except the trailing `status`.
    pub columns: Vec<String>,
    pub rows: Vec<(Vec<Cell>, Status)>,
}

/// C-style `%.12e`: twelve digits after the point and an exponent with sign
/// and at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent format always has an 'e'");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Float(x) => sci(*x),
        Cell::Int(n) => n.to_string(),
    }
}

pub fn write_csv(table: &Table, out: &mut dyn Write) -> std::io::Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let header: Vec<&str> = table.columns.iter().map(String::as_str).chain(["status"]).collect();
    writer.write_record(&header)?;
    for (cells, status) in &table.rows {
        let record: Vec<String> = cells.iter().map(cell_text).chain([status.as_str().to_string()]).collect();
        writer.write_record(&record)?;
    }
    writer.flush()
}

struct JsonRow<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
    status: Status,
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.columns.len() + 1))?;
        for (name, cell) in self.columns.iter().zip(self.cells) {
            let finite = !matches!(cell, Cell::Float(x) if !x.is_finite());
            if finite {
                let raw = RawValue::from_string(cell_text(cell)).map_err(serde::ser::Error::custom)?;
                map.serialize_entry(name, &raw)?;
            } else {
                map.serialize_entry(name, &())?;
            }
        }
        map.serialize_entry("status", self.status.as_str())?;
        map.end()
    }
}

#[derive(Serialize)]
struct JsonTable<'a> {
    schema: u32,
    mode: &'a str,
    columns: Vec<&'a str>,
    rows: Vec<JsonRow<'a>>,
}

pub fn write_json(table: &Table, out: &mut dyn Write) -> std::io::Result<()> {
    let doc = JsonTable {
        schema: crate::config::SCHEMA_VERSION,
        mode: table.mode,
        columns: table.columns.iter().map(String::as_str).chain(["status"]).collect(),
        rows: table.rows.iter().map(|(cells, status)| JsonRow { columns: &table.columns, cells, status: *status }).collect(),
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(sci(-4.334e-7), "-4.334000000000e-07");
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(6.02214076e23), "6.022140760000e+23");
        assert_eq!(sci(1e-300), "1.000000000000e-300");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(f64::NAN), "nan");
    }

    #[test]
    fn csv_and_json_layout() {
        let table = Table {
            mode: "plane-plane",
            columns: vec!["a_m".into(), "n".into()],
            rows: vec![(vec![Cell::Float(1e-7), Cell::Int(3)], Status::Ok), (vec![Cell::Float(2e-7), Cell::Float(f64::NAN)], Status::Error)],
        };
        let mut csv = Vec::new();
        write_csv(&table, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "a_m,n,status\n1.000000000000e-07,3,ok\n2.000000000000e-07,nan,error\n");
        let mut json = Vec::new();
        write_json(&table, &mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["rows"][0]["n"], 3);
        assert!(v["rows"][1]["n"].is_null());
        assert_eq!(v["rows"][1]["status"], "error");
    }
}
