use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Cell, ColumnKind, ColumnSchema, Dataset};
use crate::error::DataError;

/// Explicit column kinds keyed by column name. Hints always win over inference.
pub type SchemaHint = BTreeMap<String, ColumnKind>;

const BOOLEAN_TOKENS: [&str; 6] = ["true", "false", "0", "1", "yes", "no"];

/// Loads a CSV file with a header row. The file name becomes the provenance tag.
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &str,
    hint: Option<&SchemaHint>,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let provenance = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    read_csv(File::open(path)?, target, hint, provenance)
}

/// Column names of a CSV file, trimmed.
pub fn csv_header(path: impl AsRef<Path>) -> Result<Vec<String>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(File::open(path)?);
    Ok(rdr
        .headers()
        .map_err(|e| malformed(&e, None))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect())
}

pub fn read_csv<R: Read>(
    reader: R,
    target: &str,
    hint: Option<&SchemaHint>,
    provenance: impl Into<String>,
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| malformed(&e, None))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if !header.iter().any(|h| h == target) {
        return Err(DataError::MissingTarget(target.to_string()));
    }
    if let Some(hint) = hint {
        if let Some(unknown) = hint.keys().find(|k| !header.contains(k)) {
            return Err(DataError::UnknownColumn(unknown.clone()));
        }
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| malformed(&e, None))?;
        for (col, field) in raw.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }
    if raw[0].is_empty() {
        return Err(DataError::EmptyDataset);
    }

    let mut schema = Vec::with_capacity(header.len());
    let mut columns = Vec::with_capacity(header.len());
    for (name, values) in header.iter().zip(&raw) {
        let hinted = hint.and_then(|h| h.get(name)).copied();
        let kind = match hinted {
            Some(kind) => kind,
            None => {
                let inferred = infer_kind(values);
                // A binary target written as 0/1 reads as numeric; a target is
                // always a class label.
                if name == target && inferred.is_numeric() {
                    if values.iter().all(|v| is_boolean_token(v)) {
                        ColumnKind::Boolean
                    } else {
                        ColumnKind::Categorical
                    }
                } else {
                    inferred
                }
            }
        };
        let (col_schema, cells) = build_column(name, kind, values)?;
        schema.push(col_schema);
        columns.push(cells);
    }

    Dataset::new(schema, target, columns, provenance)
}

/// Writes the dataset as CSV with a header row; nulls become empty fields.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| DataError::Io(std::io::Error::other(e));
    wtr.write_record(dataset.schema().iter().map(|c| c.name.as_str()))
        .map_err(to_io)?;
    let mut record = Vec::with_capacity(dataset.n_cols());
    for row in 0..dataset.n_rows() {
        record.clear();
        for (col, schema) in dataset.schema().iter().enumerate() {
            record.push(match dataset.cell(row, col) {
                Cell::Null => String::new(),
                Cell::Number(v) => format!("{v}"),
                Cell::Category(c) => schema.categories()[c as usize].clone(),
            });
        }
        wtr.write_record(&record).map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn malformed(e: &csv::Error, column: Option<String>) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    DataError::MalformedCsv {
        line,
        column,
        message: e.to_string(),
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_boolean_token(s: &str) -> bool {
    let s = s.trim();
    s.is_empty() || BOOLEAN_TOKENS.iter().any(|t| t.eq_ignore_ascii_case(s))
}

fn infer_kind(values: &[String]) -> ColumnKind {
    let present = || values.iter().filter(|v| !v.is_empty());
    if present().all(|v| parse_number(v).is_some()) {
        ColumnKind::Numeric
    } else if present().all(|v| is_boolean_token(v)) {
        ColumnKind::Boolean
    } else {
        ColumnKind::Categorical
    }
}

fn build_column(
    name: &str,
    kind: ColumnKind,
    values: &[String],
) -> Result<(ColumnSchema, Vec<Cell>), DataError> {
    match kind {
        ColumnKind::Numeric => {
            let cells = values
                .iter()
                .enumerate()
                .map(|(row, v)| {
                    if v.is_empty() {
                        Ok(Cell::Null)
                    } else {
                        parse_number(v).map(Cell::Number).ok_or_else(|| {
                            DataError::MalformedCsv {
                                // +2: one header line, 1-based lines.
                                line: row as u64 + 2,
                                column: Some(name.to_string()),
                                message: format!("'{v}' is not a finite number"),
                            }
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((ColumnSchema::numeric(name), cells))
        }
        ColumnKind::Categorical | ColumnKind::Boolean => {
            let labels: BTreeSet<&str> = values
                .iter()
                .filter(|v| !v.is_empty())
                .map(String::as_str)
                .collect();
            let schema = ColumnSchema::categorical(name, kind, labels);
            let cells = values
                .iter()
                .map(|v| {
                    if v.is_empty() {
                        Cell::Null
                    } else {
                        // Every present value is one of the labels just collected.
                        Cell::Category(schema.category_index(v).expect("label collected above"))
                    }
                })
                .collect();
            Ok((schema, cells))
        }
    }
}
