//! Imputation, categorical encoding and scaling, fitted on training rows only.

use std::collections::HashMap;

use super::matrix::Matrix;
use crate::error::LearnError;
use crate::tabular::{Cell, ColumnKind, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// One indicator column per training category; unseen labels encode as all zeros.
    OneHot,
    /// Category index as a number; unseen labels map to the reserved index `k`.
    Ordinal,
}

#[derive(Debug, Clone)]
enum FeatureMap {
    Numeric {
        impute: f64,
        center: f64,
        scale: f64,
    },
    Categorical {
        index: HashMap<String, u32>,
        width: u32,
        impute: u32,
    },
}

#[derive(Debug, Clone)]
struct Feature {
    name: String,
    kind: ColumnKind,
    map: FeatureMap,
}

#[derive(Debug, Clone)]
pub struct Preprocessor {
    features: Vec<Feature>,
    encoding: Encoding,
    width: usize,
}

impl Preprocessor {
    /// Numeric nulls take the training mean, categorical nulls the training
    /// mode (lowest index on ties). With `standardize`, numeric columns are
    /// centred and scaled by their training standard deviation after imputation.
    pub fn fit(train: &Dataset, encoding: Encoding, standardize: bool) -> Self {
        let mut features = Vec::new();
        for col in train.feature_indices() {
            let schema = train.column_schema(col);
            let cells = train.column(col);
            let map = match schema.kind {
                ColumnKind::Numeric => {
                    let present: Vec<f64> = cells.iter().filter_map(Cell::as_number).collect();
                    let impute = if present.is_empty() {
                        0.0
                    } else {
                        present.iter().sum::<f64>() / present.len() as f64
                    };
                    let (center, scale) = if standardize {
                        let n = cells.len() as f64;
                        let filled = cells.iter().map(|c| c.as_number().unwrap_or(impute));
                        let mean = filled.clone().sum::<f64>() / n;
                        let var = filled.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                        let sd = var.sqrt();
                        (mean, if sd > 1e-12 { sd } else { 1.0 })
                    } else {
                        (0.0, 1.0)
                    };
                    FeatureMap::Numeric {
                        impute,
                        center,
                        scale,
                    }
                }
                ColumnKind::Categorical | ColumnKind::Boolean => {
                    let labels = schema.categories();
                    let mut counts = vec![0usize; labels.len()];
                    for c in cells.iter().filter_map(Cell::as_category) {
                        counts[c as usize] += 1;
                    }
                    let impute = counts
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                        .map_or(0, |(i, _)| i as u32);
                    FeatureMap::Categorical {
                        index: labels
                            .iter()
                            .enumerate()
                            .map(|(i, l)| (l.clone(), i as u32))
                            .collect(),
                        width: labels.len() as u32,
                        impute,
                    }
                }
            };
            features.push(Feature {
                name: schema.name.clone(),
                kind: schema.kind,
                map,
            });
        }
        let width = features
            .iter()
            .map(|f| match (&f.map, encoding) {
                (FeatureMap::Categorical { width, .. }, Encoding::OneHot) => *width as usize,
                _ => 1,
            })
            .sum();
        Self {
            features,
            encoding,
            width,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Encoded column count contributed by each original feature.
    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn transform(&self, d: &Dataset) -> Result<Matrix, LearnError> {
        struct Plan<'a> {
            column: usize,
            relabel: Vec<Option<u32>>,
            feature: &'a Feature,
        }
        let mut plans = Vec::with_capacity(self.features.len());
        for f in &self.features {
            let column = d.column_index(&f.name).ok_or_else(|| {
                LearnError::SchemaMismatch(format!("column '{}' is missing", f.name))
            })?;
            let schema = d.column_schema(column);
            if schema.kind.is_numeric() != f.kind.is_numeric() {
                return Err(LearnError::SchemaMismatch(format!(
                    "column '{}' is {} but was {} during training",
                    f.name, schema.kind, f.kind
                )));
            }
            let relabel = match &f.map {
                FeatureMap::Categorical { index, .. } => schema
                    .categories()
                    .iter()
                    .map(|l| index.get(l).copied())
                    .collect(),
                FeatureMap::Numeric { .. } => Vec::new(),
            };
            plans.push(Plan {
                column,
                relabel,
                feature: f,
            });
        }

        let n = d.n_rows();
        let mut data = vec![0.0; n * self.width];
        for (row, out) in data.chunks_exact_mut(self.width.max(1)).enumerate().take(n) {
            let mut at = 0;
            for plan in &plans {
                let cell = d.cell(row, plan.column);
                match &plan.feature.map {
                    FeatureMap::Numeric {
                        impute,
                        center,
                        scale,
                    } => {
                        let v = cell.as_number().unwrap_or(*impute);
                        out[at] = (v - center) / scale;
                        at += 1;
                    }
                    FeatureMap::Categorical { width, impute, .. } => {
                        // None: label unseen during training.
                        let code = match cell {
                            Cell::Category(c) => plan.relabel[c as usize],
                            _ => Some(*impute),
                        };
                        match self.encoding {
                            Encoding::OneHot => {
                                if let Some(c) = code {
                                    out[at + c as usize] = 1.0;
                                }
                                at += *width as usize;
                            }
                            Encoding::Ordinal => {
                                out[at] = f64::from(code.unwrap_or(*width));
                                at += 1;
                            }
                        }
                    }
                }
            }
        }
        Ok(Matrix::new(data, n, self.width))
    }
}
