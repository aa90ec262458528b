//! CSV and JSON-lines writers for analytics records.
//!
//! Schemas:
//! - timeseries: `date,n_all,n_stanced,k,raw_all,norm_all,raw_stanced,norm_stanced`
//! - regions: `region,n,k,raw,normalized`
//! - poll topics: `topic,n,k,raw,normalized`
//! - quadrant: `topic,contention,importance`
//!
//! Absent values are empty CSV fields and JSON `null`. Floats are rounded to
//! the requested number of decimals in both formats.

use std::io::{self, Write};

use serde_json::{Map, Number, Value};

use crate::analytics::{QuadrantPoint, RegionContention, SeriesPoint};
use crate::contention::ContentionResult;

pub const TIMESERIES_COLUMNS: [&str; 8] = [
    "date",
    "n_all",
    "n_stanced",
    "k",
    "raw_all",
    "norm_all",
    "raw_stanced",
    "norm_stanced",
];
pub const REGION_COLUMNS: [&str; 5] = ["region", "n", "k", "raw", "normalized"];
pub const TOPIC_COLUMNS: [&str; 5] = ["topic", "n", "k", "raw", "normalized"];
pub const QUADRANT_COLUMNS: [&str; 3] = ["topic", "contention", "importance"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    pub format: Format,
    pub precision: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            precision: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Text(String),
    Int(Option<u64>),
    Float(Option<f64>),
}

fn format_float(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    // "-0.00" reads as a sign error in reports.
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn write_table<W: Write>(
    out: W,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<Cell>>,
    opts: OutputOptions,
) -> io::Result<()> {
    match opts.format {
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(out);
            wtr.write_record(columns)?;
            for row in rows {
                let fields: Vec<String> = row
                    .into_iter()
                    .map(|c| match c {
                        Cell::Text(s) => s,
                        Cell::Int(v) => v.map_or_else(String::new, |v| v.to_string()),
                        Cell::Float(v) => v.map_or_else(String::new, |v| format_float(v, opts.precision)),
                    })
                    .collect();
                wtr.write_record(&fields)?;
            }
            wtr.flush()
        }
        Format::JsonLines => {
            let mut out = io::BufWriter::new(out);
            for row in rows {
                let mut obj = Map::new();
                for (name, cell) in columns.iter().zip(row) {
                    let value = match cell {
                        Cell::Text(s) => Value::String(s),
                        Cell::Int(v) => v.map_or(Value::Null, Value::from),
                        Cell::Float(v) => v
                            .and_then(|v| format_float(v, opts.precision).parse::<f64>().ok())
                            .and_then(Number::from_f64)
                            .map_or(Value::Null, Value::Number),
                    };
                    obj.insert((*name).to_string(), value);
                }
                serde_json::to_writer(&mut out, &Value::Object(obj))?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

pub fn write_timeseries<W: Write>(out: W, points: &[SeriesPoint], opts: OutputOptions) -> io::Result<()> {
    let rows = points.iter().map(|p| {
        vec![
            Cell::Text(p.date.to_string()),
            Cell::Int(p.n_all),
            Cell::Int(Some(p.n_stanced)),
            Cell::Int(Some(p.k as u64)),
            Cell::Float(p.raw_all),
            Cell::Float(p.contention_all),
            Cell::Float(p.raw_stanced),
            Cell::Float(p.contention_stanced),
        ]
    });
    write_table(out, &TIMESERIES_COLUMNS, rows, opts)
}

fn contention_row(key: &str, r: &ContentionResult) -> Vec<Cell> {
    vec![
        Cell::Text(key.to_string()),
        Cell::Int(Some(r.population)),
        Cell::Int(Some(r.k as u64)),
        Cell::Float(Some(r.raw)),
        Cell::Float(Some(r.normalized)),
    ]
}

pub fn write_regions<W: Write>(out: W, regions: &[RegionContention], opts: OutputOptions) -> io::Result<()> {
    let rows = regions.iter().map(|r| contention_row(&r.region, &r.result));
    write_table(out, &REGION_COLUMNS, rows, opts)
}

/// Per-topic results as `topic,n,k,raw,normalized`.
pub fn write_topics<W: Write>(out: W, topics: &[(String, ContentionResult)], opts: OutputOptions) -> io::Result<()> {
    let rows = topics.iter().map(|(t, r)| contention_row(t, r));
    write_table(out, &TOPIC_COLUMNS, rows, opts)
}

pub fn write_quadrant<W: Write>(out: W, points: &[QuadrantPoint], opts: OutputOptions) -> io::Result<()> {
    let rows = points.iter().map(|p| {
        vec![
            Cell::Text(p.topic.clone()),
            Cell::Float(Some(p.contention)),
            Cell::Float(Some(p.importance)),
        ]
    });
    write_table(out, &QUADRANT_COLUMNS, rows, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> SeriesPoint {
        SeriesPoint {
            date: "2016-06-23".parse().unwrap(),
            n_all: None,
            n_stanced: 50,
            k: 2,
            raw_all: None,
            contention_all: None,
            raw_stanced: Some(0.48),
            contention_stanced: Some(0.96),
        }
    }

    #[test]
    fn csv_with_absent_values() {
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &[point()], OutputOptions { format: Format::Csv, precision: 3 }).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "date,n_all,n_stanced,k,raw_all,norm_all,raw_stanced,norm_stanced\n2016-06-23,,50,2,,,0.480,0.960\n"
        );
    }

    #[test]
    fn json_lines() {
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &[point()], OutputOptions { format: Format::JsonLines, precision: 2 }).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["n_all"], Value::Null);
        assert_eq!(v["norm_stanced"], 0.96);
        assert_eq!(v["date"], "2016-06-23");
    }

    #[test]
    fn rounding() {
        assert_eq!(format_float(0.998556, 2), "1.00");
        assert_eq!(format_float(0.0784, 2), "0.08");
        assert_eq!(format_float(-0.0000001, 3), "0.000");
    }
}
