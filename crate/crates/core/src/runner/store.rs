//! On-disk run store: `manifest.json`, append-only `runs.jsonl` and a
//! `timings.jsonl` sidecar.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{write_atomic, ExperimentConfig, RunRecord, Scenario, SkippedSpec};
use crate::error::RunError;
use crate::esp::ErrorPerformanceCurve;
use crate::tabular::Dataset;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUNS_FILE: &str = "runs.jsonl";
pub const TIMINGS_FILE: &str = "timings.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub config_digest: String,
    pub dataset_digest: String,
    pub dataset_rows: usize,
    pub config: ExperimentConfig,
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub skipped_specs: Vec<SkippedSpec>,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, d0: &Dataset, scenarios: Vec<Scenario>, skipped: Vec<SkippedSpec>) -> Self {
        Self {
            code_version: crate::CODE_VERSION.to_string(),
            config_digest: config.digest(),
            dataset_digest: d0.digest(),
            dataset_rows: d0.n_rows(),
            config: config.clone(),
            scenarios,
            skipped_specs: skipped,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Curves of one scenario together with the repetitions left out.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub curves: Vec<ErrorPerformanceCurve>,
    /// Repetition numbers excluded because a level is missing or failed.
    pub excluded: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct RunStore {
    dir: PathBuf,
    manifest: Manifest,
    records: Vec<RunRecord>,
}

impl RunStore {
    /// Reads a store. A final line cut short by an interrupted run is
    /// ignored; any other malformed line is an error. Repeated
    /// (scenario, repetition) pairs keep their first record.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, RunError> {
        let dir = dir.as_ref().to_path_buf();
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        let text = match fs::read_to_string(dir.join(RUNS_FILE)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        let ends_cleanly = text.is_empty() || text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut records = Vec::with_capacity(lines.len());
        let mut seen = HashSet::new();
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<RunRecord>(line) {
                Ok(r) => {
                    if seen.insert((r.scenario_id.clone(), r.repetition)) {
                        records.push(r);
                    }
                }
                Err(_) if i + 1 == lines.len() && !ends_cleanly => {}
                Err(e) => {
                    return Err(RunError::CorruptStore {
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        Ok(Self { dir, manifest, records })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.manifest.config
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.manifest.scenarios
    }

    pub fn scenario(&self, id: &str) -> Option<&Scenario> {
        self.manifest.scenarios.iter().find(|s| s.id == id)
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<RunRecord> {
        self.records
    }

    pub fn records_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.records.iter().filter(move |r| r.scenario_id == id)
    }

    /// Rewrites `runs.jsonl` sorted by manifest scenario order, then repetition.
    pub fn canonicalize(&self) -> Result<(), RunError> {
        let order: HashMap<&str, usize> = self
            .manifest
            .scenarios
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let mut sorted: Vec<&RunRecord> = self.records.iter().collect();
        sorted.sort_by_key(|r| (order.get(r.scenario_id.as_str()).copied().unwrap_or(usize::MAX), r.repetition));
        let mut out = Vec::new();
        for r in sorted {
            serde_json::to_writer(&mut out, r)?;
            out.push(b'\n');
        }
        write_atomic(&self.dir.join(RUNS_FILE), &out)
    }

    /// SHA-256 of the bytes of `runs.jsonl`.
    pub fn digest(&self) -> Result<String, RunError> {
        Ok(hex::encode(Sha256::digest(fs::read(self.dir.join(RUNS_FILE))?)))
    }

    /// One curve per complete repetition, in repetition order.
    pub fn collect_curves(&self, id: &str) -> Result<CurveSet, RunError> {
        if self.scenario(id).is_none() {
            return Err(RunError::ScenarioNotFound(id.to_string()));
        }
        let config = self.config();
        let mut records: Vec<&RunRecord> = self.records_for(id).collect();
        records.sort_by_key(|r| r.repetition);
        let mut curves = Vec::new();
        let mut excluded = Vec::new();
        for r in records {
            match r.is_complete(&config.schedule).then(|| r.curve(&config.metric)).flatten() {
                Some(c) => curves.push(c),
                None => excluded.push(r.repetition),
            }
        }
        if curves.is_empty() {
            return Err(RunError::IncompleteRepetition(id.to_string()));
        }
        Ok(CurveSet { curves, excluded })
    }
}
