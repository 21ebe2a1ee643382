//! Trace CSV: one row per recorded iterate, floats in shortest round-trip form.

use std::io::{Read, Write};

use feasik_core::TraceRecord;

fn join(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn split(field: &str) -> Result<Vec<usize>, std::num::ParseIntError> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field.split(';').map(str::parse).collect()
}

pub fn header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["k", "bracket_k", "alpha", "r", "active", "violated", "step_norm", "feasible"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..dim).map(|j| format!("x_{j}")));
    h
}

pub fn write_trace<W: Write>(out: W, dim: usize, trace: &[TraceRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(dim))?;
    for rec in trace {
        let mut row = vec![
            rec.k.to_string(),
            rec.bracket_k.to_string(),
            format!("{:?}", rec.alpha),
            format!("{:?}", rec.r),
            join(&rec.active),
            join(&rec.violated),
            format!("{:?}", rec.step_norm),
            rec.feasible.to_string(),
        ];
        row.extend(rec.x.as_slice().iter().map(|c| format!("{c:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub bracket_k: u64,
    pub alpha: f64,
    pub r: f64,
    pub active: Vec<usize>,
    pub violated: Vec<usize>,
    pub step_norm: f64,
    pub feasible: bool,
    pub x: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad value in column {column}")]
    Value { row: usize, column: usize },
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>, TraceReadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |column| TraceReadError::Value { row: n, column };
        let num = |c: usize| rec[c].parse::<f64>().map_err(|_| bad(c));
        let int = |c: usize| rec[c].parse::<u64>().map_err(|_| bad(c));
        rows.push(TraceRow {
            k: int(0)?,
            bracket_k: int(1)?,
            alpha: num(2)?,
            r: num(3)?,
            active: split(&rec[4]).map_err(|_| bad(4))?,
            violated: split(&rec[5]).map_err(|_| bad(5))?,
            step_norm: num(6)?,
            feasible: rec[7].parse().map_err(|_| bad(7))?,
            x: (8..rec.len()).map(num).collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}
