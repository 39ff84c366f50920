//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corrupt::{CorruptionSpec, ErrorType, RowPredicate, SeveritySchedule};
use crate::error::RunError;
use crate::learn::{ModelSpec, PerfMetric};
use crate::tabular::SchemaHint;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    /// CSV file, relative paths resolve against the working directory.
    pub path: PathBuf,
    pub target: String,
    #[serde(default, skip_serializing_if = "SchemaHint::is_empty")]
    pub schema_hints: SchemaHint,
}

/// A hand-written corruption cell; the schedule comes from the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub error_type: ErrorType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<RowPredicate>,
}

impl CustomSpec {
    pub fn resolve(&self, schedule: &SeveritySchedule) -> CorruptionSpec {
        CorruptionSpec {
            error_type: self.error_type.clone(),
            features: self.features.clone(),
            schedule: schedule.clone(),
            predicate: self.predicate.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    /// Every listed cell-error type on every feature separately. An empty
    /// feature list means all non-target columns.
    OneFeatureAtATime {
        error_types: Vec<ErrorType>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        features: Vec<String>,
    },
    /// Every listed cell-error type on each group of numeric features
    /// connected by `|r| >= threshold`.
    CorrelatedFeatures {
        error_types: Vec<ErrorType>,
        threshold: f64,
    },
    Custom { specs: Vec<CustomSpec> },
}

fn default_repetitions() -> u32 {
    30
}

fn default_alpha() -> f64 {
    0.05
}

fn default_deltas() -> Vec<f64> {
    vec![0.05]
}

fn default_split_ratio() -> f64 {
    0.8
}

fn default_schedule() -> Vec<f64> {
    SeveritySchedule::standard().levels().to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("esp-runs")
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub dataset: DatasetRef,
    pub strategies: Vec<Strategy>,
    pub models: Vec<ModelSpec>,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub metric: PerfMetric,
    pub master_seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_split_ratio")]
    pub split_ratio: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl ExperimentConfig {
    /// A config with the defaults for everything but the essentials.
    pub fn new(dataset: DatasetRef, strategies: Vec<Strategy>, models: Vec<ModelSpec>, master_seed: u64) -> Self {
        Self {
            version: CONFIG_VERSION,
            dataset,
            strategies,
            models,
            schedule: default_schedule(),
            repetitions: default_repetitions(),
            metric: PerfMetric::default(),
            master_seed,
            alpha: default_alpha(),
            deltas: default_deltas(),
            split_ratio: default_split_ratio(),
            output_dir: default_output_dir(),
        }
    }

    /// Parses and validates. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            RunError::validation(if path == "." { "(document)".into() } else { path }, e.inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn severity_schedule(&self) -> Result<SeveritySchedule, RunError> {
        SeveritySchedule::new(self.schedule.clone()).map_err(|e| RunError::validation("schedule", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.version != CONFIG_VERSION {
            return Err(RunError::validation(
                "version",
                format!("unsupported version {} (expected {CONFIG_VERSION})", self.version),
            ));
        }
        if self.dataset.path.as_os_str().is_empty() {
            return Err(RunError::validation("dataset.path", "must not be empty"));
        }
        if self.dataset.target.is_empty() {
            return Err(RunError::validation("dataset.target", "must not be empty"));
        }
        if self.strategies.is_empty() {
            return Err(RunError::validation("strategies", "at least one strategy is required"));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            let at = |f: &str| format!("strategies[{i}].{f}");
            match s {
                Strategy::OneFeatureAtATime { error_types, .. } | Strategy::CorrelatedFeatures { error_types, .. } => {
                    if error_types.is_empty() {
                        return Err(RunError::validation(at("error_types"), "must not be empty"));
                    }
                    if let Some(j) = error_types.iter().position(|e| !e.is_feature_error()) {
                        return Err(RunError::validation(
                            format!("strategies[{i}].error_types[{j}]"),
                            format!("'{}' does not corrupt feature cells", error_types[j].name()),
                        ));
                    }
                }
                Strategy::Custom { specs } if specs.is_empty() => {
                    return Err(RunError::validation(at("specs"), "must not be empty"));
                }
                Strategy::Custom { .. } => {}
            }
            if let Strategy::CorrelatedFeatures { threshold, .. } = s {
                if !(*threshold > 0.0 && *threshold <= 1.0) {
                    return Err(RunError::validation(
                        at("threshold"),
                        format!("{threshold} is outside (0, 1]"),
                    ));
                }
            }
        }
        for (i, m) in self.models.iter().enumerate() {
            m.validate().map_err(|e| RunError::validation(format!("models[{i}]"), e.to_string()))?;
        }
        self.severity_schedule()?;
        if self.repetitions == 0 {
            return Err(RunError::validation("repetitions", "must be at least 1"));
        }
        if !open_unit(self.alpha) {
            return Err(RunError::validation("alpha", format!("{} is outside (0, 1)", self.alpha)));
        }
        if self.deltas.is_empty() {
            return Err(RunError::validation("deltas", "at least one threshold is required"));
        }
        for (i, d) in self.deltas.iter().enumerate() {
            if !open_unit(*d) {
                return Err(RunError::validation(format!("deltas[{i}]"), format!("{d} is outside (0, 1)")));
            }
        }
        if !open_unit(self.split_ratio) {
            return Err(RunError::validation(
                "split_ratio",
                format!("{} is outside (0, 1)", self.split_ratio),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the config with `output_dir` blanked, so a store can be
    /// moved without invalidating it.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        hex::encode(Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dataset": {"path": "data.csv", "target": "y"},
        "strategies": [{"strategy": "one_feature_at_a_time", "error_types": [{"type": "missing_values"}]}],
        "models": [{"label": "NB"}],
        "master_seed": 7
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.schedule, vec![0.0, 20.0, 40.0, 60.0, 80.0]);
        assert_eq!(c.repetitions, 30);
        assert_eq!(c.metric, PerfMetric::f1());
        assert_eq!(c.deltas, vec![0.05]);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    fn field_of(json: &str) -> String {
        match ExperimentConfig::from_json(json) {
            Err(RunError::Validation { field, .. }) => field,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        let bad_threshold = MINIMAL.replace(
            r#"{"strategy": "one_feature_at_a_time", "error_types": [{"type": "missing_values"}]}"#,
            r#"{"strategy": "correlated_features", "error_types": [{"type": "outliers"}], "threshold": 1.5}"#,
        );
        assert_eq!(field_of(&bad_threshold), "strategies[0].threshold");
        assert_eq!(field_of(&MINIMAL.replace(r#""master_seed": 7"#, r#""master_seed": 7, "alpha": 2"#)), "alpha");
        assert_eq!(
            field_of(&MINIMAL.replace(r#""master_seed": 7"#, r#""master_seed": 7, "schedule": [0, 50, 40]"#)),
            "schedule"
        );
        match ExperimentConfig::from_json(&MINIMAL.replace(r#"{"label": "NB"}"#, r#"{"label": "NB", "k": 3}"#)) {
            Err(RunError::Validation { field, message }) => {
                assert_eq!(field, "models[0]");
                assert!(message.contains("`k`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(field_of(&MINIMAL.replace("\"NB\"", "\"SVM\"")), "models[0].label");
        assert_eq!(
            field_of(&MINIMAL.replace("missing_values", "duplication")),
            "strategies[0].error_types[0]"
        );
        assert_eq!(field_of(&MINIMAL.replace(r#""master_seed": 7"#, r#""master_seed": -1"#)), "master_seed");
    }

    #[test]
    fn digest_ignores_output_dir() {
        let a = ExperimentConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.digest(), b.digest());
        b.master_seed = 8;
        assert_ne!(a.digest(), b.digest());
    }
}
