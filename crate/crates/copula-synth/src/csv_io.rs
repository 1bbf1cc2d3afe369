//! CSV ingestion with schema inference, and deterministic CSV output.
//!
//! Inference rule: a column whose every value parses as a finite real is
//! numeric, anything else is categorical; per-column hints override.
//! Numbers are written in their shortest round-trip decimal form, so
//! write-then-ingest is value-identical.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::table::{Column, DataTable};

/// Per-column overrides and parsing options for [`ingest_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchemaHints {
    /// Columns forced numeric (error when a value does not parse).
    pub numeric: Vec<String>,
    /// Columns forced categorical.
    pub categorical: Vec<String>,
    /// Columns dropped on ingestion.
    pub exclude: Vec<String>,
    pub delimiter: u8,
    /// When false, columns are named c0, c1, ... and every row is data.
    pub has_header: bool,
}

impl Default for CsvSchemaHints {
    fn default() -> Self {
        CsvSchemaHints {
            numeric: Vec::new(),
            categorical: Vec::new(),
            exclude: Vec::new(),
            delimiter: b',',
            has_header: true,
        }
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a table from a CSV file.
pub fn ingest_csv(path: &Path, hints: &CsvSchemaHints) -> Result<DataTable> {
    let file = std::fs::File::open(path)?;
    ingest_csv_reader(file, hints)
}

/// Reads a table from any CSV byte stream.
pub fn ingest_csv_reader<R: Read>(reader: R, hints: &CsvSchemaHints) -> Result<DataTable> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(hints.delimiter)
        .has_headers(hints.has_header)
        .flexible(false)
        .from_reader(reader);

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for record in csv_reader.records() {
        let record = record.map_err(map_csv_error)?;
        rows.push(record);
    }

    let names: Vec<String> = if hints.has_header {
        let headers = csv_reader.headers().map_err(map_csv_error)?;
        if headers.is_empty() {
            return Err(Error::domain("empty CSV file"));
        }
        headers.iter().map(str::to_string).collect()
    } else {
        let width = rows
            .first()
            .ok_or_else(|| Error::domain("empty CSV file"))?
            .len();
        (0..width).map(|i| format!("c{i}")).collect()
    };
    if rows.is_empty() {
        return Err(Error::domain("CSV file has no data rows"));
    }

    for hint_name in hints
        .numeric
        .iter()
        .chain(&hints.categorical)
        .chain(&hints.exclude)
    {
        if !names.contains(hint_name) {
            return Err(Error::schema(format!(
                "hint references unknown column {hint_name:?}"
            )));
        }
    }

    let mut out_names = Vec::new();
    let mut out_columns = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if hints.exclude.contains(name) {
            continue;
        }
        let raw: Vec<&str> = rows.iter().map(|r| r.get(j).unwrap_or("")).collect();
        let forced_numeric = hints.numeric.contains(name);
        let forced_categorical = hints.categorical.contains(name);
        let column = if forced_categorical {
            Column::Categorical(raw.iter().map(|s| s.to_string()).collect())
        } else {
            let parsed: Option<Vec<f64>> = raw.iter().map(|s| parse_finite(s)).collect();
            match parsed {
                Some(values) => Column::Numeric(values),
                None if forced_numeric => {
                    let bad = raw
                        .iter()
                        .position(|s| parse_finite(s).is_none())
                        .expect("a value failed to parse");
                    return Err(Error::Parse {
                        line: bad + 1 + usize::from(hints.has_header),
                        message: format!(
                            "column {name:?} is forced numeric but {:?} is not a finite number",
                            raw[bad]
                        ),
                    });
                }
                None => Column::Categorical(raw.iter().map(|s| s.to_string()).collect()),
            }
        };
        out_names.push(name.clone());
        out_columns.push(column);
    }
    DataTable::new(out_names, out_columns)
}

fn map_csv_error(e: csv::Error) -> Error {
    let line = match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => {
            pos.as_ref().map(|p| p.line() as usize).unwrap_or(0)
        }
        _ => e.position().map(|p| p.line() as usize).unwrap_or(0),
    };
    Error::Parse { line, message: e.to_string() }
}

/// Writes a table as CSV. Numeric cells use the shortest decimal
/// representation that round-trips, so repeated write/ingest cycles are
/// byte-stable.
pub fn write_csv_writer<W: Write>(table: &DataTable, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(table.names()).map_err(map_csv_error)?;
    for row in 0..table.n_rows() {
        let mut record = csv::StringRecord::new();
        for j in 0..table.n_cols() {
            match table.column(j) {
                Column::Numeric(v) => record.push_field(&format!("{}", v[row])),
                Column::Categorical(v) => record.push_field(&v[row]),
            }
        }
        w.write_record(&record).map_err(map_csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a table to a CSV file.
pub fn write_csv(table: &DataTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_writer(table, file)
}

/// Renders a table to a CSV string.
pub fn write_csv_string(table: &DataTable) -> Result<String> {
    let mut buf = Vec::new();
    write_csv_writer(table, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}
