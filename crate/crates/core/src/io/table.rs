use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Schema version written to, and required from, every table.
pub const TABLE_VERSION: u32 = 1;

fn version_line(kind: &str) -> String {
    format!("# envtrack-{kind} v{TABLE_VERSION}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Check the `# envtrack-<kind> v<N>` line; returns the kind.
fn check_version(path: &Path, line: &str, expected_kind: Option<&str>) -> Result<String> {
    let line = line.trim_end();
    let rest = line
        .strip_prefix("# envtrack-")
        .ok_or_else(|| Error::Format(format!("{}: missing '# envtrack-<kind> v<N>' header line", path.display())))?;
    let (kind, version) = rest
        .rsplit_once(" v")
        .ok_or_else(|| Error::Format(format!("{}: malformed header line '{line}'", path.display())))?;
    if version != TABLE_VERSION.to_string() {
        return Err(Error::Format(format!(
            "{}: unsupported {kind} table version v{version} (expected v{TABLE_VERSION})",
            path.display()
        )));
    }
    if let Some(k) = expected_kind {
        if k != kind {
            return Err(Error::Format(format!("{}: expected a {k} table, found {kind}", path.display())));
        }
    }
    Ok(kind.to_string())
}

/// Untyped table: column names and string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Format(format!("{} table has no '{name}' column", self.kind)))
    }
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{}", version_line(&table.kind))?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(&table.columns).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path, expected_kind: Option<&str>) -> Result<Table> {
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let kind = check_version(path, &first, expected_kind)?;
    let mut r = csv::Reader::from_reader(reader);
    let columns = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)?;
    Ok(Table { kind, columns, rows })
}

pub fn write_records<T: Serialize>(path: &Path, kind: &str, records: &[T]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{}", version_line(kind))?;
    let mut w = csv::Writer::from_writer(f);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<Vec<T>> {
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    check_version(path, &first, Some(kind))?;
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
