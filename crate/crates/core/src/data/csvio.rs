//! CSV tables with an optional `<name>.domains` sidecar.
//!
//! The sidecar has one line per column, `name,label,label,...`, fixing the
//! label order (and so the codes) and allowing labels that never occur.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::table::CategoricalTable;

/// The sidecar next to a data file: `data.csv` -> `data.domains`.
pub fn domains_path(path: &Path) -> PathBuf {
    path.with_extension("domains")
}

fn build(names: Vec<String>, rows: Vec<csv::StringRecord>, declared: &HashMap<String, Vec<String>>) -> Result<CategoricalTable> {
    let m = names.len();
    let mut labels: Vec<Vec<String>> =
        names.iter().map(|n| declared.get(n).cloned().unwrap_or_default()).collect();
    let mut lookup: Vec<HashMap<String, u32>> = labels
        .iter()
        .map(|ls| ls.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect())
        .collect();
    let mut columns = vec![Vec::with_capacity(rows.len()); m];
    for (r, record) in rows.iter().enumerate() {
        for (c, field) in record.iter().enumerate() {
            let code = match lookup[c].get(field) {
                Some(&code) => code,
                None if declared.contains_key(&names[c]) => {
                    return Err(Error::Shape(format!(
                        "row {}: `{field}` is not a declared state of `{}`",
                        r + 1,
                        names[c]
                    )));
                }
                None => {
                    let code = labels[c].len() as u32;
                    labels[c].push(field.to_string());
                    lookup[c].insert(field.to_string(), code);
                    code
                }
            };
            columns[c].push(code);
        }
    }
    CategoricalTable::new(names, labels, columns)
}

fn parse(reader: impl Read, header: bool, declared: &HashMap<String, Vec<String>>) -> Result<CategoricalTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = rdr.records();
    let first = match records.next() {
        None => return Err(Error::Shape("empty file".into())),
        Some(r) => r?,
    };
    let (names, mut rows) = if header {
        (first.iter().map(str::to_string).collect(), vec![])
    } else {
        ((0..first.len()).map(|i| format!("V{i}")).collect(), vec![first])
    };
    for record in records {
        rows.push(record?);
    }
    if rows.is_empty() {
        return Err(Error::Shape("no data rows".into()));
    }
    build(names, rows, declared)
}

/// Reads a table; categories are coded in order of first appearance.
pub fn read_csv(reader: impl Read, header: bool) -> Result<CategoricalTable> {
    parse(reader, header, &HashMap::new())
}

/// Reads a table file, honouring its sidecar when one exists.
pub fn load_csv(path: &Path, header: bool) -> Result<CategoricalTable> {
    let sidecar = domains_path(path);
    let mut declared = HashMap::new();
    if sidecar.exists() && sidecar != path {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(&sidecar)?;
        for record in rdr.records() {
            let record = record?;
            let mut fields = record.iter().map(str::to_string);
            if let Some(name) = fields.next() {
                declared.insert(name, fields.collect());
            }
        }
    }
    parse(File::open(path)?, header, &declared)
}

/// Writes the table with a header row.
pub fn write_csv_to(writer: impl Write, table: &CategoricalTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(table.names())?;
    let mut record = Vec::with_capacity(table.n_cols());
    for r in 0..table.n_rows() {
        record.clear();
        record.extend((0..table.n_cols()).map(|c| table.labels(c)[table.column(c)[r] as usize].as_str()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the table and its sidecar, so [`load_csv`] restores codes and
/// cardinalities exactly.
pub fn write_csv(table: &CategoricalTable, path: &Path) -> Result<()> {
    write_csv_to(File::create(path)?, table)?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(domains_path(path))?;
    for c in 0..table.n_cols() {
        let mut record = vec![table.name(c)];
        record.extend(table.labels(c).iter().map(String::as_str));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
