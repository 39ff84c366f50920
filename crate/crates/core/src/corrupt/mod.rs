//! Corruption operators.
//!
//! A [`CorruptionSpec`] names an error type, its target features, a severity
//! schedule and an optional row predicate. [`corrupt`] materialises one
//! severity level. Selections are nested across levels: each target feature
//! owns one seeded permutation of its eligible rows and level `e` takes the
//! first `floor(e/100 * eligible)` entries, so raising the level only ever
//! adds cells. Replacement values are drawn in permutation order from the
//! same stream, so a cell corrupted at 20% holds the same value at 80%.

mod predicate;
mod strategy;

pub use predicate::{Clause, Comparator, Literal, RowPredicate};
pub use strategy::{correlated_features, correlated_groups, one_feature_at_a_time};

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CorruptError;
use crate::seed::substream;
use crate::tabular::{Cell, ColumnKind, Dataset};

fn default_scale() -> f64 {
    1.0
}

fn default_magnitude() -> [f64; 2] {
    [3.0, 5.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ErrorType {
    /// Gaussian noise with standard deviation `scale` times the column's
    /// clean standard deviation; categorical cells switch to another label.
    NoisyValues {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Cells replaced by `mean ± u * std`, `u ~ U[magnitude[0], magnitude[1]]`.
    Outliers {
        #[serde(default = "default_magnitude")]
        magnitude: [f64; 2],
    },
    MissingValues,
    /// Flips the binary target.
    Mislabeling,
    /// Appends uniform-with-replacement copies of existing rows.
    Duplication,
    /// Appends copies of rows of one class.
    OversamplingClass { class: String },
}

impl ErrorType {
    pub fn noisy() -> Self {
        ErrorType::NoisyValues { scale: 1.0 }
    }

    pub fn outliers() -> Self {
        ErrorType::Outliers {
            magnitude: default_magnitude(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorType::NoisyValues { .. } => "noisy_values",
            ErrorType::Outliers { .. } => "outliers",
            ErrorType::MissingValues => "missing_values",
            ErrorType::Mislabeling => "mislabeling",
            ErrorType::Duplication => "duplication",
            ErrorType::OversamplingClass { .. } => "oversampling_class",
        }
    }

    /// Error types that modify cells of named feature columns.
    pub fn is_feature_error(&self) -> bool {
        matches!(
            self,
            ErrorType::NoisyValues { .. } | ErrorType::Outliers { .. } | ErrorType::MissingValues
        )
    }

    /// Error types that append rows instead of editing cells.
    pub fn is_row_error(&self) -> bool {
        matches!(self, ErrorType::Duplication | ErrorType::OversamplingClass { .. })
    }

    fn check_params(&self) -> Result<(), CorruptError> {
        match self {
            ErrorType::NoisyValues { scale } if !(scale.is_finite() && *scale >= 0.0) => Err(
                CorruptError::InvalidParameter(format!("noise scale {scale} must be finite and >= 0")),
            ),
            ErrorType::Outliers { magnitude: [lo, hi] }
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo <= hi) =>
            {
                Err(CorruptError::InvalidParameter(format!(
                    "outlier magnitude range [{lo}, {hi}] is invalid"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorType::OversamplingClass { class } => write!(f, "oversampling_class({class})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Strictly increasing corruption percentages starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SeveritySchedule(Vec<f64>);

impl SeveritySchedule {
    pub fn new(levels: Vec<f64>) -> Result<Self, CorruptError> {
        if levels.len() < 2 {
            return Err(CorruptError::InvalidSchedule(
                "need at least the baseline and one corrupted level".into(),
            ));
        }
        if levels[0] != 0.0 {
            return Err(CorruptError::InvalidSchedule("first level must be 0".into()));
        }
        if levels.iter().any(|l| !(0.0..=100.0).contains(l)) {
            return Err(CorruptError::InvalidSchedule(
                "levels must lie in [0, 100]".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CorruptError::InvalidSchedule(
                "levels must be strictly increasing".into(),
            ));
        }
        Ok(Self(levels))
    }

    /// 0, 20, 40, 60, 80.
    pub fn standard() -> Self {
        Self(vec![0.0, 20.0, 40.0, 60.0, 80.0])
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        *self.0.last().expect("schedule is non-empty")
    }

    pub fn contains(&self, level: f64) -> bool {
        self.0.iter().any(|l| (l - level).abs() < 1e-9)
    }
}

impl Default for SeveritySchedule {
    fn default() -> Self {
        Self::standard()
    }
}

impl TryFrom<Vec<f64>> for SeveritySchedule {
    type Error = CorruptError;

    fn try_from(levels: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(levels)
    }
}

impl From<SeveritySchedule> for Vec<f64> {
    fn from(s: SeveritySchedule) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub error_type: ErrorType,
    #[serde(default)]
    pub features: Vec<String>,
    #[serde(default)]
    pub schedule: SeveritySchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<RowPredicate>,
}

impl CorruptionSpec {
    pub fn new(error_type: ErrorType, features: Vec<String>, schedule: SeveritySchedule) -> Self {
        Self {
            error_type,
            features,
            schedule,
            predicate: None,
        }
    }

    pub fn with_predicate(mut self, predicate: RowPredicate) -> Self {
        self.predicate = Some(predicate);
        self
    }

    /// Short human-readable label, e.g. `outliers[BounceRates,ExitRates]`.
    pub fn label(&self) -> String {
        if self.features.is_empty() {
            self.error_type.to_string()
        } else {
            format!("{}[{}]", self.error_type, self.features.join(","))
        }
    }

    /// Checks the spec against a dataset and resolves feature columns.
    pub fn validate(&self, d: &Dataset) -> Result<Vec<usize>, CorruptError> {
        self.error_type.check_params()?;
        let name = self.error_type.name();
        let target = d.target_name();
        match &self.error_type {
            et if et.is_feature_error() => {
                if self.features.is_empty() {
                    return Err(CorruptError::MissingFeatures(name));
                }
                let mut cols = Vec::with_capacity(self.features.len());
                for f in &self.features {
                    let idx = d
                        .column_index(f)
                        .ok_or_else(|| CorruptError::FeatureNotFound(f.clone()))?;
                    if f == target {
                        return Err(CorruptError::FeatureIsTarget(f.clone()));
                    }
                    let kind = d.column_schema(idx).kind;
                    match et {
                        ErrorType::Outliers { .. } if !kind.is_numeric() => {
                            return Err(CorruptError::OutlierOnCategorical(f.clone()));
                        }
                        ErrorType::NoisyValues { .. }
                            if !kind.is_numeric() && d.column_schema(idx).categories().len() < 2 =>
                        {
                            return Err(CorruptError::SingleCategory(f.clone()));
                        }
                        _ => {}
                    }
                    if !cols.contains(&idx) {
                        cols.push(idx);
                    }
                }
                Ok(cols)
            }
            ErrorType::Mislabeling => {
                if self.features.iter().any(|f| f != target) {
                    return Err(CorruptError::UnexpectedFeatures(name));
                }
                Ok(vec![d.target_index()])
            }
            ErrorType::OversamplingClass { class } => {
                if !self.features.is_empty() {
                    return Err(CorruptError::UnexpectedFeatures(name));
                }
                if !d.class_labels().contains(class) {
                    return Err(CorruptError::UnknownClass(class.clone()));
                }
                Ok(Vec::new())
            }
            _ => {
                if !self.features.is_empty() {
                    return Err(CorruptError::UnexpectedFeatures(name));
                }
                Ok(Vec::new())
            }
        }
    }
}

/// Cell identified by source row id and column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TouchedCell {
    pub row: u64,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorruptionTrace {
    pub level: f64,
    pub seed: u64,
    /// Modified cells, grouped by feature in spec order, each group in
    /// selection order.
    pub touched: Vec<TouchedCell>,
    /// Row ids copied by row-level errors, in append order.
    pub sources: Vec<u64>,
}

impl CorruptionTrace {
    fn empty(level: f64, seed: u64) -> Self {
        Self {
            level,
            seed,
            ..Self::default()
        }
    }

    pub fn added_rows(&self) -> usize {
        self.sources.len()
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.level.to_bits().to_le_bytes());
        h.update(self.seed.to_le_bytes());
        for t in &self.touched {
            h.update(t.row.to_le_bytes());
            h.update((t.column as u64).to_le_bytes());
        }
        h.update([0xff]);
        for s in &self.sources {
            h.update(s.to_le_bytes());
        }
        hex::encode(&h.finalize()[..16])
    }
}

/// `floor(level/100 * n)`, tolerant to binary rounding of exact products.
pub fn corruption_count(level: f64, n: usize) -> usize {
    ((level * n as f64) / 100.0 + 1e-9).floor() as usize
}

#[derive(Debug, Clone, Copy)]
struct ColumnStats {
    mean: f64,
    std: f64,
}

fn numeric_stats(cells: &[Cell]) -> ColumnStats {
    let values: Vec<f64> = cells.iter().filter_map(Cell::as_number).collect();
    if values.is_empty() {
        return ColumnStats { mean: 0.0, std: 0.0 };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    ColumnStats { mean, std }
}

/// Applies `spec` at `level` to a copy of `d0`.
///
/// Level 0 returns `d0` unchanged with an empty trace. The target column is
/// only ever modified by mislabeling; row errors append copies and never
/// edit existing rows.
pub fn corrupt(
    d0: &Dataset,
    spec: &CorruptionSpec,
    level: f64,
    seed: u64,
) -> Result<(Dataset, CorruptionTrace), CorruptError> {
    let columns = spec.validate(d0)?;
    if !spec.schedule.contains(level) {
        return Err(CorruptError::LevelNotInSchedule(level));
    }
    let rows = match &spec.predicate {
        Some(p) => {
            let rows = p.select(d0)?;
            if rows.is_empty() {
                return Err(CorruptError::PredicateSelectsNoRows);
            }
            rows
        }
        None => (0..d0.n_rows()).collect(),
    };
    if level == 0.0 {
        return Ok((d0.clone(), CorruptionTrace::empty(level, seed)));
    }

    let mut out = d0.clone();
    let mut trace = CorruptionTrace::empty(level, seed);

    if spec.error_type.is_row_error() {
        let pool: Vec<usize> = match &spec.error_type {
            ErrorType::OversamplingClass { class } => {
                let class_idx = d0
                    .class_labels()
                    .iter()
                    .position(|c| c == class)
                    .expect("validated above");
                rows.into_iter()
                    .filter(|&r| d0.class_of(r) == class_idx)
                    .collect()
            }
            _ => rows,
        };
        if pool.is_empty() {
            return Err(CorruptError::PredicateSelectsNoRows);
        }
        // Severity is a fraction of the original table size.
        let count = corruption_count(level, d0.n_rows());
        let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, 0));
        let picks: Vec<usize> = (0..count)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect();
        trace.sources = picks.iter().map(|&p| d0.row_ids()[p]).collect();
        out.append_copies(&picks);
        return Ok((out, trace));
    }

    for (fi, &col) in columns.iter().enumerate() {
        let eligible: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|&r| !d0.cell(r, col).is_null())
            .collect();
        let count = corruption_count(level, eligible.len());
        let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, fi as u64));
        let mut order = eligible;
        order.shuffle(&mut rng);
        let chosen = &order[..count];

        let schema = d0.column_schema(col);
        let stats = numeric_stats(d0.column(col));
        match &spec.error_type {
            ErrorType::NoisyValues { scale } => match schema.kind {
                ColumnKind::Numeric => {
                    let sd = scale * stats.std;
                    for &r in chosen {
                        let noise = if sd > 0.0 {
                            Normal::new(0.0, sd).expect("finite sd").sample(&mut rng)
                        } else {
                            0.0
                        };
                        let v = d0.cell(r, col).as_number().expect("eligible cells are present");
                        out.set_cell(r, col, Cell::Number(v + noise));
                    }
                }
                ColumnKind::Categorical | ColumnKind::Boolean => {
                    let k = schema.categories().len() as u32;
                    for &r in chosen {
                        let cur = d0.cell(r, col).as_category().expect("eligible cells are present");
                        let mut pick = rng.random_range(0..k - 1);
                        if pick >= cur {
                            pick += 1;
                        }
                        out.set_cell(r, col, Cell::Category(pick));
                    }
                }
            },
            ErrorType::Outliers { magnitude: [lo, hi] } => {
                for &r in chosen {
                    let u = if hi > lo { rng.random_range(*lo..=*hi) } else { *lo };
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    out.set_cell(r, col, Cell::Number(stats.mean + sign * u * stats.std));
                }
            }
            ErrorType::MissingValues => {
                for &r in chosen {
                    out.set_cell(r, col, Cell::Null);
                }
            }
            ErrorType::Mislabeling => {
                for &r in chosen {
                    let flipped = 1 - d0.class_of(r) as u32;
                    out.set_cell(r, col, Cell::Category(flipped));
                }
            }
            ErrorType::Duplication | ErrorType::OversamplingClass { .. } => unreachable!(),
        }
        trace.touched.extend(chosen.iter().map(|&r| TouchedCell {
            row: d0.row_ids()[r],
            column: col,
        }));
    }
    Ok((out, trace))
}
