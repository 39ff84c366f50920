#![allow(dead_code)]

use esprofile_core::{Cell, ColumnKind, ColumnSchema, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `cols` standard-normal-ish numeric features plus a balanced yes/no
/// target. Feature 0 is shifted by the class so it carries signal.
pub fn numeric_dataset(rows: usize, cols: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u32> = (0..rows).map(|i| (i % 2) as u32).collect();
    let mut schema: Vec<ColumnSchema> = (0..cols).map(|j| ColumnSchema::numeric(format!("x{j}"))).collect();
    let mut columns: Vec<Vec<Cell>> = (0..cols)
        .map(|j| {
            labels
                .iter()
                .map(|&y| {
                    let shift = if j == 0 { 2.0 * y as f64 } else { 0.0 };
                    Cell::Number(shift + rng.random::<f64>() * 2.0 - 1.0)
                })
                .collect()
        })
        .collect();
    schema.push(ColumnSchema::categorical("y", ColumnKind::Boolean, ["no", "yes"]));
    columns.push(labels.into_iter().map(Cell::Category).collect());
    Dataset::new(schema, "y", columns, "synthetic").unwrap()
}

/// Numeric features, a three-level categorical feature and a binary target.
pub fn mixed_dataset(rows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<u32> = (0..rows).map(|i| (i % 2) as u32).collect();
    let a: Vec<Cell> = y.iter().map(|&c| Cell::Number(c as f64 * 1.5 + rng.random::<f64>())).collect();
    let b: Vec<Cell> = y.iter().map(|_| Cell::Number(rng.random::<f64>() * 10.0)).collect();
    let colour: Vec<Cell> = y.iter().map(|_| Cell::Category(rng.random_range(0..3))).collect();
    let schema = vec![
        ColumnSchema::numeric("a"),
        ColumnSchema::numeric("b"),
        ColumnSchema::categorical("colour", ColumnKind::Categorical, ["blue", "green", "red"]),
        ColumnSchema::categorical("y", ColumnKind::Boolean, ["no", "yes"]),
    ];
    let columns = vec![a, b, colour, y.into_iter().map(Cell::Category).collect()];
    Dataset::new(schema, "y", columns, "mixed").unwrap()
}

/// Writes `mixed_dataset` to `dir/mixed.csv`.
pub fn write_mixed_csv(dir: &std::path::Path, rows: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join("mixed.csv");
    let f = std::fs::File::create(&path).unwrap();
    esprofile_core::tabular::write_csv(&mixed_dataset(rows, seed), f).unwrap();
    path
}
