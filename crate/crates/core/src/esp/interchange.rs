//! JSON interchange for curves produced by external trainers:
//!
//! ```json
//! {"metric": "f1", "positive_class": "yes",
//!  "runs": [{"seed": 7, "points": [{"e": 0, "p": 0.91}, {"e": 20, "p": 0.88}]}]}
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CurvePoint, ErrorPerformanceCurve};
use crate::error::EspError;
use crate::learn::PerfMetric;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positive_class: Option<String>,
    runs: Vec<RunEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunEntry {
    seed: u64,
    points: Vec<CurvePoint>,
}

pub fn read_curves<R: Read>(reader: R) -> Result<Vec<ErrorPerformanceCurve>, EspError> {
    let file: CurveFile =
        serde_json::from_reader(reader).map_err(|e| EspError::SchemaViolation(e.to_string()))?;
    let metric = match (file.metric.as_str(), file.positive_class) {
        ("f1", positive_class) => PerfMetric::F1 { positive_class },
        ("accuracy", None) => PerfMetric::Accuracy,
        ("accuracy", Some(_)) => {
            return Err(EspError::SchemaViolation(
                "positive_class is only meaningful for f1".into(),
            ))
        }
        (other, _) => return Err(EspError::SchemaViolation(format!("unknown metric '{other}'"))),
    };
    if file.runs.is_empty() {
        return Err(EspError::SchemaViolation("runs is empty".into()));
    }
    file.runs
        .into_iter()
        .enumerate()
        .map(|(i, run)| {
            ErrorPerformanceCurve::new(run.points, metric.clone(), run.seed)
                .map_err(|e| EspError::SchemaViolation(format!("runs[{i}]: {e}")))
        })
        .collect()
}

pub fn import_curves(path: impl AsRef<Path>) -> Result<Vec<ErrorPerformanceCurve>, EspError> {
    read_curves(BufReader::new(File::open(path)?))
}

/// Writes curves sharing one metric. Fails with `MixedMetrics` otherwise.
pub fn write_curves<W: Write>(writer: W, curves: &[ErrorPerformanceCurve]) -> Result<(), EspError> {
    let Some(first) = curves.first() else {
        return Err(EspError::SchemaViolation("no curves to write".into()));
    };
    if curves.iter().any(|c| c.metric() != first.metric()) {
        return Err(EspError::MixedMetrics);
    }
    let (metric, positive_class) = match first.metric() {
        PerfMetric::F1 { positive_class } => ("f1", positive_class.clone()),
        PerfMetric::Accuracy => ("accuracy", None),
    };
    let file = CurveFile {
        metric: metric.to_string(),
        positive_class,
        runs: curves
            .iter()
            .map(|c| RunEntry {
                seed: c.run_seed(),
                points: c.points().to_vec(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(writer, &file).map_err(|e| EspError::Io(e.into()))
}

pub fn export_curves(path: impl AsRef<Path>, curves: &[ErrorPerformanceCurve]) -> Result<(), EspError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_curves(&mut w, curves)?;
    w.flush()?;
    Ok(())
}
