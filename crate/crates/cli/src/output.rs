//! CSV and JSON emission with atomic replace.

use std::fmt;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// Seventeen significant digits; enough for any f64 to parse back exactly.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug)]
pub enum EmitError {
    Schema(String),
    Io(String),
}

impl fmt::Display for EmitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmitError::Schema(m) => write!(f, "schema violation: {m}"),
            EmitError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, EmitError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| EmitError::Io(e.to_string()))?;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(EmitError::Schema(format!("row {i} has {} fields, header has {}", row.len(), self.header.len())));
            }
            let mut fields = Vec::with_capacity(row.len());
            for (cell, col) in row.iter().zip(&self.header) {
                fields.push(match cell {
                    Cell::Int(v) => v.to_string(),
                    Cell::Real(v) if v.is_nan() => {
                        return Err(EmitError::Schema(format!("NaN in column `{col}` of row {i}")));
                    }
                    Cell::Real(v) => format_real(*v),
                    Cell::Text(s) => s.clone(),
                    Cell::Empty => String::new(),
                });
            }
            w.write_record(&fields).map_err(|e| EmitError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| EmitError::Io(e.to_string()))
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| EmitError::Io(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), EmitError> {
    write_atomic(path, &table.to_csv()?)
}

pub fn emit_json(value: &serde_json::Value, path: &Path) -> Result<(), EmitError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| EmitError::Io(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let t = Table::new(vec!["rep", "pvalue"]);
        assert_eq!(t.to_csv().unwrap(), b"rep,pvalue\r\n");
    }

    #[test]
    fn reals_round_trip() {
        for v in [0.05, 1.0 / 3.0, 1e-300, 123456.789, -0.0, f64::MIN_POSITIVE] {
            assert_eq!(format_real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn nan_is_rejected() {
        let mut t = Table::new(vec!["x"]);
        t.push(vec![Cell::Real(f64::NAN)]);
        assert!(matches!(t.to_csv(), Err(EmitError::Schema(_))));
    }

    #[test]
    fn ragged_row_is_rejected() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Cell::Int(1)]);
        assert!(matches!(t.to_csv(), Err(EmitError::Schema(_))));
    }
}
