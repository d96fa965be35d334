//! CSV and JSON writers. Every float is printed with 17 significant
//! digits so that output is byte-identical across runs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::ser::{Error as _, SerializeMap};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::args::Format;
use crate::failure::Failure;

/// `{:.16e}` for finite values; `nan`, `inf`, `-inf` otherwise.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A float serialized through [`num`]; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(num(self.0))
            .map_err(S::Error::custom)?
            .serialize(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => num(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(v) => Num(*v).serialize(s),
            Cell::Int(i) => s.serialize_u64(*i as u64),
            Cell::Empty => s.serialize_none(),
        }
    }
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

struct Record<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
}

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(c, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub solver_tol: Num,
    pub max_iter: usize,
    pub method: String,
    pub newton_fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_rel_tol: Option<Num>,
}

/// Run description written at the head of JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub system: String,
    pub dim: usize,
    pub params: BTreeMap<String, Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    pub tracked: Vec<String>,
    pub scheme: String,
    pub policy: String,
    pub tau: Num,
    pub steps: usize,
    pub x0: Vec<Num>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    pub status: &'static str,
    pub aborted_at_step: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Document<'a> {
    metadata: &'a Metadata,
    steps: Vec<Record<'a>>,
}

pub fn write_csv<W: Write>(w: &mut W, table: &Table) -> io::Result<()> {
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write>(w: &mut W, meta: &Metadata, table: &Table) -> io::Result<()> {
    let doc = Document {
        metadata: meta,
        steps: table
            .rows
            .iter()
            .map(|cells| Record {
                columns: &table.columns,
                cells,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &doc).map_err(io::Error::other)?;
    writeln!(w)
}

/// Write `table` to `out` (standard output if `None`) in `format`.
pub fn emit(out: Option<&Path>, format: Format, meta: &Metadata, table: &Table) -> Result<(), Failure> {
    let label = out.map_or_else(|| "standard output".to_string(), |p| p.display().to_string());
    let fail = |e| Failure::io(&label, e);
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(fail)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => write_csv(&mut w, table),
        Format::Json => write_json(&mut w, meta, table),
    }
    .and_then(|_| w.flush())
    .map_err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(f64::NAN), "nan");
        let back: f64 = num(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_numbers_are_raw() {
        let s = serde_json::to_string(&[Num(0.1), Num(f64::INFINITY)]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,null]");
        let parsed: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed, vec![Some(0.1), None]);
    }

    #[test]
    fn csv_layout() {
        let table = Table {
            columns: vec!["t".into(), "x1".into(), "iters".into(), "residual".into()],
            rows: vec![vec![Cell::Float(0.0), Cell::Float(1.5), Cell::Int(0), Cell::Empty]],
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &table).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,x1,iters,residual\n0.0000000000000000e0,1.5000000000000000e0,0,\n"
        );
    }
}
