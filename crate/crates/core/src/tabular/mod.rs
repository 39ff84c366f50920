//! Typed tabular data with a designated binary target.
//!
//! Storage is column-major. Every row carries a stable row id so that
//! partitions and corrupted copies can be traced back to the source table.

mod describe;
mod io;
mod split;

pub use describe::{class_balance, pearson_matrix, point_biserial, ClassShare, CorrelationMatrix};
pub use io::{csv_header, load_csv, read_csv, write_csv, SchemaHint};
pub use split::{stratified_split, SplitPair};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DataError;

/// Row ids at or above this value belong to rows synthesized after loading
/// (duplication, oversampling). They can never collide with source rows.
pub const SYNTHETIC_ROW_BASE: u64 = 1 << 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Boolean,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Numeric)
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Boolean => "boolean",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Sorted, duplicate-free category labels. `None` for numeric columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
            categories: None,
        }
    }

    /// Builds a categorical (or boolean) column; labels are sorted and deduplicated.
    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        kind: ColumnKind,
        labels: impl IntoIterator<Item = S>,
    ) -> Self {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        labels.dedup();
        Self {
            name: name.into(),
            kind,
            categories: Some(labels),
        }
    }

    pub fn categories(&self) -> &[String] {
        self.categories.as_deref().unwrap_or(&[])
    }

    pub fn category_index(&self, label: &str) -> Option<u32> {
        self.categories()
            .binary_search_by(|c| c.as_str().cmp(label))
            .ok()
            .map(|i| i as u32)
    }
}

/// One cell of the grid: a number, a category index into the column's
/// `categories`, or null.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Cell {
    #[default]
    Null,
    Number(f64),
    Category(u32),
}

impl Cell {
    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    pub fn as_number(&self) -> Option<f64> {
        match *self {
            Cell::Number(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<u32> {
        match *self {
            Cell::Category(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    target: usize,
    columns: Vec<Vec<Cell>>,
    row_ids: Vec<u64>,
    provenance: String,
}

impl Dataset {
    /// Validates and assembles a dataset from column-major cells. Row ids
    /// default to `0..n`.
    pub fn new(
        schema: Vec<ColumnSchema>,
        target: &str,
        columns: Vec<Vec<Cell>>,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        let n = columns.first().map_or(0, Vec::len);
        let row_ids = (0..n as u64).collect();
        Self::with_row_ids(schema, target, columns, row_ids, provenance)
    }

    pub fn with_row_ids(
        schema: Vec<ColumnSchema>,
        target: &str,
        columns: Vec<Vec<Cell>>,
        row_ids: Vec<u64>,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        if schema.len() != columns.len() {
            return Err(DataError::ShapeMismatch(format!(
                "{} schema entries for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        if schema.len() < 2 {
            return Err(DataError::TooFewColumns(schema.len()));
        }
        let mut seen = HashSet::new();
        for col in &schema {
            if !seen.insert(col.name.as_str()) {
                return Err(DataError::DuplicateColumn(col.name.clone()));
            }
        }
        let target_idx = schema
            .iter()
            .position(|c| c.name == target)
            .ok_or_else(|| DataError::MissingTarget(target.to_string()))?;

        let n = row_ids.len();
        if n == 0 {
            return Err(DataError::EmptyDataset);
        }
        for (col, cells) in schema.iter().zip(&columns) {
            if cells.len() != n {
                return Err(DataError::ShapeMismatch(format!(
                    "column '{}' has {} cells, expected {n}",
                    col.name,
                    cells.len()
                )));
            }
            validate_column(col, cells)?;
        }

        let tcol = &schema[target_idx];
        if tcol.kind.is_numeric() || tcol.categories().len() != 2 {
            return Err(DataError::NonBinaryTarget {
                column: tcol.name.clone(),
                distinct: tcol.categories().len(),
            });
        }
        if let Some(row) = columns[target_idx].iter().position(Cell::is_null) {
            return Err(DataError::NullTarget { row });
        }

        Ok(Self {
            schema,
            target: target_idx,
            columns,
            row_ids,
            provenance: provenance.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn column_schema(&self, idx: usize) -> &ColumnSchema {
        &self.schema[idx]
    }

    pub fn column(&self, idx: usize) -> &[Cell] {
        &self.columns[idx]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.columns[col][row]
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target_name(&self) -> &str {
        &self.schema[self.target].name
    }

    /// The two class labels, in category-index order.
    pub fn class_labels(&self) -> &[String] {
        self.schema[self.target].categories()
    }

    /// Class index (0 or 1) of a row.
    pub fn class_of(&self, row: usize) -> usize {
        match self.columns[self.target][row] {
            Cell::Category(c) => c as usize,
            // Construction rejects null or non-category targets.
            _ => unreachable!("target cells are always categories"),
        }
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.n_rows()).map(|r| self.class_of(r)).collect()
    }

    /// Indices of every non-target column, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.n_cols()).filter(|&c| c != self.target).collect()
    }

    /// New dataset holding the given row positions (in the given order),
    /// keeping their row ids and the full schema.
    pub fn select_rows(&self, positions: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            target: self.target,
            columns: self
                .columns
                .iter()
                .map(|col| positions.iter().map(|&p| col[p]).collect())
                .collect(),
            row_ids: positions.iter().map(|&p| self.row_ids[p]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub(crate) fn set_cell(&mut self, row: usize, col: usize, cell: Cell) {
        self.columns[col][row] = cell;
    }

    /// Appends copies of existing rows, assigning fresh synthetic row ids.
    pub(crate) fn append_copies(&mut self, sources: &[usize]) {
        let next = self
            .row_ids
            .iter()
            .copied()
            .filter(|&id| id >= SYNTHETIC_ROW_BASE)
            .max()
            .map_or(SYNTHETIC_ROW_BASE, |m| m + 1);
        for col in &mut self.columns {
            col.reserve(sources.len());
            for &s in sources {
                let cell = col[s];
                col.push(cell);
            }
        }
        self.row_ids
            .extend((0..sources.len() as u64).map(|i| next + i));
    }

    /// SHA-256 over schema, row ids and cell contents. Two datasets with the
    /// same digest are byte-for-byte the same table.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for col in &self.schema {
            h.update(col.name.as_bytes());
            h.update([0u8, col.kind as u8]);
            for c in col.categories() {
                h.update(c.as_bytes());
                h.update([0u8]);
            }
        }
        h.update((self.target as u64).to_le_bytes());
        for id in &self.row_ids {
            h.update(id.to_le_bytes());
        }
        for col in &self.columns {
            for cell in col {
                match *cell {
                    Cell::Null => h.update([0u8]),
                    Cell::Number(v) => {
                        h.update([1u8]);
                        h.update(v.to_bits().to_le_bytes());
                    }
                    Cell::Category(c) => {
                        h.update([2u8]);
                        h.update(c.to_le_bytes());
                    }
                }
            }
        }
        hex::encode(h.finalize())
    }
}

fn validate_column(col: &ColumnSchema, cells: &[Cell]) -> Result<(), DataError> {
    match col.kind {
        ColumnKind::Numeric => {
            if col.categories.is_some() {
                return Err(DataError::InvalidSchema(format!(
                    "numeric column '{}' must not carry categories",
                    col.name
                )));
            }
        }
        ColumnKind::Categorical | ColumnKind::Boolean => {
            let cats = col.categories();
            if cats.is_empty() {
                return Err(DataError::InvalidSchema(format!(
                    "column '{}' has no categories",
                    col.name
                )));
            }
            if cats.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DataError::InvalidSchema(format!(
                    "categories of '{}' must be sorted and unique",
                    col.name
                )));
            }
        }
    }
    for (row, cell) in cells.iter().enumerate() {
        let ok = match (*cell, col.kind) {
            (Cell::Null, _) => true,
            (Cell::Number(v), ColumnKind::Numeric) => v.is_finite(),
            (Cell::Category(c), ColumnKind::Categorical | ColumnKind::Boolean) => {
                (c as usize) < col.categories().len()
            }
            _ => false,
        };
        if !ok {
            return Err(DataError::InvalidCell {
                row,
                column: col.name.clone(),
            });
        }
    }
    Ok(())
}
