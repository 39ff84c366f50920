//! Deterministic fixtures shared by the benchmarks.

use esprofile_core::{Cell, ColumnKind, ColumnSchema, Dataset, ErrorPerformanceCurve, EspProfile};

/// SplitMix64 step mapped to `[0, 1)`.
fn unit(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (z ^ (z >> 31)) as f64 / u64::MAX as f64
}

/// `features` numeric columns plus a categorical one and a binary target.
/// The first two features carry signal.
pub fn table(rows: usize, features: usize, seed: u64) -> Dataset {
    let mut s = seed;
    let y: Vec<u32> = (0..rows).map(|i| (i % 3 == 0) as u32).collect();
    let mut schema: Vec<ColumnSchema> = (0..features).map(|j| ColumnSchema::numeric(format!("f{j}"))).collect();
    let mut columns: Vec<Vec<Cell>> = (0..features)
        .map(|j| {
            y.iter()
                .map(|&c| {
                    let shift = if j < 2 { c as f64 } else { 0.0 };
                    Cell::Number(shift + unit(&mut s) * 2.0)
                })
                .collect()
        })
        .collect();
    schema.push(ColumnSchema::categorical("kind", ColumnKind::Categorical, ["a", "b", "c", "d"]));
    columns.push((0..rows).map(|_| Cell::Category((unit(&mut s) * 4.0) as u32)).collect());
    schema.push(ColumnSchema::categorical("y", ColumnKind::Boolean, ["no", "yes"]));
    columns.push(y.into_iter().map(Cell::Category).collect());
    Dataset::new(schema, "y", columns, "bench").expect("fixture is valid")
}

/// Noisy declining curves on the standard schedule.
pub fn profiles(runs: usize, seed: u64) -> Vec<EspProfile> {
    let mut s = seed;
    let e = [0.0, 20.0, 40.0, 60.0, 80.0];
    (0..runs)
        .map(|_| {
            let p: Vec<f64> = e.iter().map(|x| 0.85 - x * 0.002 + unit(&mut s) * 0.04).collect();
            let curve = ErrorPerformanceCurve::from_pairs(&e, &p).expect("curve in range");
            EspProfile::compute(curve).expect("positive baseline")
        })
        .collect()
}

/// Paired differences with ties and a small positive drift.
pub fn differences(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..n).map(|_| ((unit(&mut s) - 0.4) * 20.0).round() / 10.0).collect()
}

/// Raw p-values, a tenth of them small.
pub fn p_values(m: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..m)
        .map(|i| if i % 10 == 0 { unit(&mut s) * 1e-4 } else { unit(&mut s) })
        .collect()
}
