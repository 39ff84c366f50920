use serde::{Deserialize, Serialize};

use super::{Cell, Dataset};
use crate::error::DataError;

/// Pearson correlations between the numeric columns of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Dataset column index for each row/column of the matrix.
    pub columns: Vec<usize>,
    values: Vec<f64>,
    degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    /// True when the pair had fewer than 2 overlapping rows or a zero-variance side.
    pub fn is_degenerate(&self, i: usize, j: usize) -> bool {
        self.degenerate[i * self.len() + j]
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.at(i, j))
    }
}

/// Single-pass co-moment accumulator over the rows where both sides are present.
#[derive(Default)]
struct CoMoment {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl CoMoment {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mean_x;
        self.mean_x += dx / self.n;
        let dy = y - self.mean_y;
        self.mean_y += dy / self.n;
        self.sxx += dx * (x - self.mean_x);
        self.syy += dy * (y - self.mean_y);
        self.sxy += dx * (y - self.mean_y);
    }

    /// Returns `(r, degenerate)`.
    fn correlation(&self) -> (f64, bool) {
        if self.n < 2.0 || self.sxx <= 0.0 || self.syy <= 0.0 {
            return (0.0, true);
        }
        let r = self.sxy / (self.sxx.sqrt() * self.syy.sqrt());
        (r.clamp(-1.0, 1.0), false)
    }
}

fn correlate(x: &[Cell], y: &[Cell]) -> (f64, bool) {
    let mut acc = CoMoment::default();
    for (a, b) in x.iter().zip(y) {
        if let (Cell::Number(a), Cell::Number(b)) = (a, b) {
            acc.push(*a, *b);
        }
    }
    acc.correlation()
}

/// Pairwise-complete Pearson matrix over every numeric column.
pub fn pearson_matrix(d: &Dataset) -> Result<CorrelationMatrix, DataError> {
    let columns: Vec<usize> = (0..d.n_cols())
        .filter(|&c| d.column_schema(c).kind.is_numeric())
        .collect();
    if columns.len() < 2 {
        return Err(DataError::InsufficientNumericColumns(columns.len()));
    }
    let k = columns.len();
    let mut values = vec![0.0; k * k];
    let mut degenerate = vec![false; k * k];
    for i in 0..k {
        values[i * k + i] = 1.0;
        for j in (i + 1)..k {
            let (r, flag) = correlate(d.column(columns[i]), d.column(columns[j]));
            values[i * k + j] = r;
            values[j * k + i] = r;
            degenerate[i * k + j] = flag;
            degenerate[j * k + i] = flag;
        }
    }
    Ok(CorrelationMatrix {
        names: columns
            .iter()
            .map(|&c| d.column_schema(c).name.clone())
            .collect(),
        columns,
        values,
        degenerate,
    })
}

/// Point-biserial correlation of a numeric column with the binary target
/// (class index 0/1). Degenerate inputs give 0.
pub fn point_biserial(d: &Dataset, column: &str) -> Result<f64, DataError> {
    let idx = d
        .column_index(column)
        .ok_or_else(|| DataError::UnknownColumn(column.to_string()))?;
    if !d.column_schema(idx).kind.is_numeric() {
        return Err(DataError::InvalidSchema(format!(
            "'{column}' is not numeric"
        )));
    }
    let target: Vec<Cell> = (0..d.n_rows())
        .map(|r| Cell::Number(d.class_of(r) as f64))
        .collect();
    Ok(correlate(d.column(idx), &target).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub label: String,
    pub count: usize,
    pub fraction: f64,
}

/// Per-class row fractions, ordered by class index.
pub fn class_balance(d: &Dataset) -> Vec<ClassShare> {
    let mut counts = vec![0usize; d.class_labels().len()];
    for r in 0..d.n_rows() {
        counts[d.class_of(r)] += 1;
    }
    let n = d.n_rows() as f64;
    d.class_labels()
        .iter()
        .zip(counts)
        .map(|(label, count)| ClassShare {
            label: label.clone(),
            count,
            fraction: count as f64 / n,
        })
        .collect()
}
