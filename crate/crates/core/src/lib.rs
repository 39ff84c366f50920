//! Error sensitivity profiling for tabular classifiers.
//!
//! The pipeline corrupts a clean training table at increasing severities,
//! trains fixed-hyperparameter classifiers on every corrupted copy, scores
//! them on an untouched test partition and summarises each error-performance
//! curve with three numbers: the negated error/performance correlation
//! (EPC), the normalised signed area against the baseline (AEPC) and the
//! slopes of its locally monotone regions. Scenarios are then filtered by a
//! Wilcoxon signed-rank test with Benjamini-Yekutieli correction and an
//! |AEPC| relevance cut.
//!
//! Modules follow that flow: [`tabular`] → [`corrupt`] → [`learn`] →
//! [`esp`] → [`stats`], orchestrated by [`runner`] and summarised by
//! [`analysis`] and [`report`].

pub mod analysis;
pub mod corrupt;
pub mod error;
pub mod esp;
pub mod learn;
pub mod report;
pub mod runner;
pub mod seed;
pub mod stats;
pub mod tabular;

pub use corrupt::{CorruptionSpec, CorruptionTrace, ErrorType, SeveritySchedule};
pub use error::{CorruptError, DataError, EspError, LearnError, RunError, StatsError};
pub use esp::{AggregateEsp, ErrorPerformanceCurve, EspProfile};
pub use learn::{FittedModel, ModelSpec, PerfMetric};
pub use runner::{ExperimentConfig, RunRecord, RunStore, Scenario};
pub use stats::{ScenarioOutcome, SignificanceReport};
pub use tabular::{Cell, ColumnKind, ColumnSchema, Dataset, SplitPair};

/// Version string recorded in run-store manifests.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), "/", env!("CARGO_PKG_VERSION"));
