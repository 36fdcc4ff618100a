//! CSV ingestion with per-column storage inference.

use std::io::Read;

use luxen_core::datetime::parse_iso8601;
use luxen_core::{Column, ColumnData, Frame};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("duplicate header name: {0}")]
    DuplicateHeader(String),
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("empty input: no header row")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Frame(#[from] luxen_core::Error),
}

impl LoadError {
    /// True when the input was unreadable rather than malformed.
    pub fn is_io(&self) -> bool {
        matches!(self, LoadError::Csv(e) if e.is_io_error())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { delimiter: b',', has_header: true }
    }
}

fn is_null(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("nan")
}

fn parse_bool(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn all<T>(cells: &[Option<&str>], parse: impl Fn(&str) -> Option<T>) -> Option<Vec<Option<T>>> {
    cells.iter().map(|c| c.map_or(Some(None), |s| parse(s).map(Some))).collect()
}

/// Picks the first storage type every non-null cell parses as: integer,
/// float, datetime, boolean, then string. An all-null column is string.
pub fn infer_column(name: &str, cells: &[Option<&str>]) -> Column {
    let data = if cells.iter().all(Option::is_none) {
        ColumnData::String(luxen_core::frame::StrColumn::from_cells(cells.iter().copied()))
    } else if let Some(v) = all(cells, |s| s.trim().parse::<i64>().ok()) {
        ColumnData::Integer(v)
    } else if let Some(v) = all(cells, |s| s.trim().parse::<f64>().ok().filter(|f| f.is_finite())) {
        ColumnData::Float(v)
    } else if let Some(v) = all(cells, parse_iso8601) {
        ColumnData::Datetime(v)
    } else if let Some(v) = all(cells, parse_bool) {
        ColumnData::Boolean(v)
    } else {
        ColumnData::String(luxen_core::frame::StrColumn::from_cells(cells.iter().copied()))
    };
    Column::new(name, data)
}

pub fn load_csv(source: impl Read, options: CsvOptions, name: &str) -> Result<Frame, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    let headers: Vec<String> = if options.has_header {
        let first = records.next().ok_or(LoadError::Empty)??;
        first.iter().map(|h| h.trim().to_string()).collect()
    } else {
        let first = match records.next() {
            Some(r) => r?,
            None => return Err(LoadError::Empty),
        };
        let names = (0..first.len()).map(|i| format!("column_{i}")).collect();
        rows.push(first);
        names
    };
    let mut seen = std::collections::HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(LoadError::DuplicateHeader(h.clone()));
        }
    }
    for r in records {
        rows.push(r?);
    }
    let offset = if options.has_header { 2 } else { 1 };
    for (i, r) in rows.iter().enumerate() {
        if r.len() != headers.len() {
            return Err(LoadError::RaggedRow { row: i + offset, found: r.len(), expected: headers.len() });
        }
    }
    let columns = headers
        .iter()
        .enumerate()
        .map(|(c, h)| {
            let cells: Vec<Option<&str>> = rows.iter().map(|r| Some(&r[c]).filter(|s| !is_null(s))).collect();
            infer_column(h, &cells)
        })
        .collect();
    Ok(Frame::new(columns, name)?)
}
