//! CSV output with round-trippable float formatting.

use std::io::{self, Write};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV cell: integers and labels print as-is, floats with 17 significant digits.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(&'static str),
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Text(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

/// Row writer with a fixed header; floats use [`fmt_f64`].
pub struct CsvWriter<W: Write> {
    out: csv::Writer<W>,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W, header: &[&str]) -> io::Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(header)?;
        Ok(Self { out, columns: header.len() })
    }

    pub fn row(&mut self, cells: &[Cell]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        self.out.write_record(cells.iter().map(|c| match c {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => fmt_f64(*f),
            Cell::Text(s) => s.to_string(),
        }))?;
        Ok(())
    }

    pub fn finish(self) -> io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}
