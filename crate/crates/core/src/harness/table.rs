//! CSV tables emitted by the harness. Floats are written with 17 significant
//! digits so every file parses back to identical values.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One CSV row type.
pub trait Row: Sized {
    const HEADER: &'static [&'static str];

    fn to_fields(&self) -> Vec<String>;

    fn from_fields(fields: &[&str]) -> Result<Self>;
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(name: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column {name}: '{s}' is not a number")))
}

fn parse_usize(name: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column {name}: '{s}' is not an integer")))
}

/// `eps,dt,N,error`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub dt: f64,
    pub n: usize,
    pub error: f64,
}

impl Row for ConvergenceRow {
    const HEADER: &'static [&'static str] = &["eps", "dt", "N", "error"];

    fn to_fields(&self) -> Vec<String> {
        vec![fmt_f64(self.eps), fmt_f64(self.dt), self.n.to_string(), fmt_f64(self.error)]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(Self {
            eps: parse_f64("eps", f[0])?,
            dt: parse_f64("dt", f[1])?,
            n: parse_usize("N", f[2])?,
            error: parse_f64("error", f[3])?,
        })
    }
}

/// `t,value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub value: f64,
}

impl Row for TraceRow {
    const HEADER: &'static [&'static str] = &["t", "value"];

    fn to_fields(&self) -> Vec<String> {
        vec![fmt_f64(self.t), fmt_f64(self.value)]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(Self {
            t: parse_f64("t", f[0])?,
            value: parse_f64("value", f[1])?,
        })
    }
}

/// `eps,order,error`: distance between the oscillating solution and an
/// averaged model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub eps: f64,
    pub order: u8,
    pub error: f64,
}

impl Row for AsymptoticRow {
    const HEADER: &'static [&'static str] = &["eps", "order", "error"];

    fn to_fields(&self) -> Vec<String> {
        vec![fmt_f64(self.eps), self.order.to_string(), fmt_f64(self.error)]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        let order = parse_usize("order", f[1])?;
        Ok(Self {
            eps: parse_f64("eps", f[0])?,
            order: u8::try_from(order).map_err(|_| Error::Parse(format!("column order: {order} out of range")))?,
            error: parse_f64("error", f[2])?,
        })
    }
}

/// `eps,order`: least-squares slope of log(error) per ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderRow {
    pub eps: f64,
    pub order: f64,
}

impl Row for OrderRow {
    const HEADER: &'static [&'static str] = &["eps", "order"];

    fn to_fields(&self) -> Vec<String> {
        vec![fmt_f64(self.eps), fmt_f64(self.order)]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(Self {
            eps: parse_f64("eps", f[0])?,
            order: parse_f64("order", f[1])?,
        })
    }
}

pub fn write_rows<R: Row, W: Write>(rows: &[R], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Parse(format!("csv write: {e}"));
    out.write_record(R::HEADER).map_err(io)?;
    for r in rows {
        out.write_record(r.to_fields()).map_err(io)?;
    }
    out.flush().map_err(|e| Error::Parse(format!("csv write: {e}")))?;
    Ok(())
}

pub fn read_rows<R: Row, Rd: Read>(r: Rd) -> Result<Vec<R>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .clone();
    let mut cols = Vec::with_capacity(R::HEADER.len());
    for name in R::HEADER {
        let pos = header
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))?;
        cols.push(pos);
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv record {}: {e}", line + 1)))?;
        let fields: Vec<&str> = cols
            .iter()
            .map(|&c| {
                rec.get(c)
                    .ok_or_else(|| Error::Parse(format!("csv record {}: too few fields", line + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(R::from_fields(&fields)?);
    }
    Ok(rows)
}

pub fn write_file<R: Row>(rows: &[R], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(rows, std::io::BufWriter::new(f))
}

pub fn read_file<R: Row>(path: &Path) -> Result<Vec<R>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows(std::io::BufReader::new(f))
}

/// Sort convergence rows by `(ε, Δt, N)`.
pub fn sort_convergence(rows: &mut [ConvergenceRow]) {
    rows.sort_by(|a, b| {
        a.eps
            .total_cmp(&b.eps)
            .then(a.dt.total_cmp(&b.dt))
            .then(a.n.cmp(&b.n))
    });
}
