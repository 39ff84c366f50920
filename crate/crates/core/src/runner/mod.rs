//! Scenario enumeration and the seeded corrupt → train → evaluate loop.

mod config;
mod store;

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{CustomSpec, DatasetRef, ExperimentConfig, Strategy, CONFIG_VERSION};
pub use store::{Manifest, RunStore, MANIFEST_FILE, RUNS_FILE, TIMINGS_FILE};

use crate::corrupt::{corrupt, correlated_features, one_feature_at_a_time, CorruptionSpec};
use crate::error::RunError;
use crate::esp::{CurvePoint, ErrorPerformanceCurve};
use crate::learn::{self, ModelSpec};
use crate::seed::derive;
use crate::tabular::{load_csv, stratified_split, Dataset};

/// One (corruption spec, model) cell of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub model: ModelSpec,
    pub corruption: CorruptionSpec,
    /// Provenance tag of the clean dataset.
    pub dataset: String,
}

impl Scenario {
    pub fn new(model: ModelSpec, corruption: CorruptionSpec, dataset: impl Into<String>) -> Self {
        let dataset = dataset.into();
        let id = scenario_id(&model, &corruption, &dataset);
        Self {
            id,
            model,
            corruption,
            dataset,
        }
    }

    /// e.g. `RF / outliers[hoehe]`.
    pub fn label(&self) -> String {
        format!("{} / {}", self.model.label(), self.corruption.label())
    }
}

/// First 16 bytes (hex) of SHA-256 over the canonical JSON of the contents.
pub fn scenario_id(model: &ModelSpec, corruption: &CorruptionSpec, dataset: &str) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        model: &'a ModelSpec,
        corruption: &'a CorruptionSpec,
        dataset: &'a str,
    }
    let bytes = serde_json::to_vec(&Key {
        model,
        corruption,
        dataset,
    })
    .expect("scenario key serializes");
    hex::encode(&Sha256::digest(bytes)[..16])
}

/// A generated spec that does not apply to the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSpec {
    pub spec: String,
    pub reason: String,
}

/// Resolves every strategy into concrete specs. Generated specs that fail
/// validation (outliers on a categorical column, ...) are skipped and
/// reported; an invalid custom spec is an error.
pub fn resolve_specs(
    config: &ExperimentConfig,
    d0: &Dataset,
) -> Result<(Vec<CorruptionSpec>, Vec<SkippedSpec>), RunError> {
    let schedule = config.severity_schedule()?;
    let mut specs = Vec::new();
    let mut skipped = Vec::new();
    for (i, strategy) in config.strategies.iter().enumerate() {
        let generated = match strategy {
            Strategy::OneFeatureAtATime { error_types, features } => {
                let features = if features.is_empty() {
                    d0.feature_indices()
                        .into_iter()
                        .map(|c| d0.column_schema(c).name.clone())
                        .collect()
                } else {
                    features.clone()
                };
                one_feature_at_a_time(d0, error_types, &features, &schedule)
            }
            Strategy::CorrelatedFeatures { error_types, threshold } => {
                correlated_features(d0, error_types, *threshold, &schedule)
            }
            Strategy::Custom { specs: custom } => {
                for (j, c) in custom.iter().enumerate() {
                    let spec = c.resolve(&schedule);
                    spec.validate(d0)
                        .map_err(|e| RunError::validation(format!("strategies[{i}].specs[{j}]"), e.to_string()))?;
                    specs.push(spec);
                }
                continue;
            }
        }
        .map_err(|e| RunError::validation(format!("strategies[{i}]"), e.to_string()))?;
        for spec in generated {
            match spec.validate(d0) {
                Ok(_) => specs.push(spec),
                Err(e) => skipped.push(SkippedSpec {
                    spec: spec.label(),
                    reason: e.to_string(),
                }),
            }
        }
    }
    Ok((specs, skipped))
}

/// Specs × models, spec major. Duplicate cells are kept once.
pub fn enumerate_scenarios(config: &ExperimentConfig, d0: &Dataset) -> Result<Vec<Scenario>, RunError> {
    let (specs, _) = resolve_specs(config, d0)?;
    Ok(scenarios_from(&specs, &config.models, d0.provenance()))
}

fn scenarios_from(specs: &[CorruptionSpec], models: &[ModelSpec], dataset: &str) -> Vec<Scenario> {
    let mut out: Vec<Scenario> = Vec::with_capacity(specs.len() * models.len());
    let mut seen = std::collections::HashSet::new();
    for spec in specs {
        for model in models {
            let s = Scenario::new(*model, spec.clone(), dataset);
            if seen.insert(s.id.clone()) {
                out.push(s);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub e: f64,
    /// `None` when corruption or training failed at this level.
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub train_rows: usize,
    pub trace_digest: String,
    /// Test partition checksum just before evaluation.
    pub test_checksum: String,
}

/// One repetition of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    /// 1-based.
    pub repetition: u32,
    pub master_seed: u64,
    pub split_seed: u64,
    pub corruption_seed: u64,
    pub model_seed: u64,
    /// Test partition checksum taken right after the split.
    pub test_checksum: String,
    pub levels: Vec<LevelResult>,
}

impl RunRecord {
    /// True when every scheduled level produced a performance value.
    pub fn is_complete(&self, schedule: &[f64]) -> bool {
        self.levels.len() == schedule.len()
            && self.levels.iter().zip(schedule).all(|(l, &e)| l.e == e && l.p.is_some())
    }

    pub fn curve(&self, metric: &learn::PerfMetric) -> Option<ErrorPerformanceCurve> {
        let points = self
            .levels
            .iter()
            .map(|l| l.p.map(|p| CurvePoint { e: l.e, p }))
            .collect::<Option<Vec<_>>>()?;
        ErrorPerformanceCurve::new(points, metric.clone(), self.model_seed).ok()
    }
}

/// Wall-clock cost of one repetition; kept apart from the records so that
/// the store itself stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub scenario_id: String,
    pub repetition: u32,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RepetitionSeeds {
    pub split: u64,
    pub corruption: u64,
    pub model: u64,
}

pub fn repetition_seeds(master: u64, scenario_id: &str, repetition: u32) -> RepetitionSeeds {
    let n = u64::from(repetition);
    RepetitionSeeds {
        split: derive(master, scenario_id, &[n, 0]),
        corruption: derive(master, scenario_id, &[n, 1]),
        model: derive(master, scenario_id, &[n, 2]),
    }
}

/// Runs every level of one repetition. Corruption touches only the training
/// partition; the test partition checksum is re-verified before every
/// evaluation.
pub fn run_repetition(
    d0: &Dataset,
    scenario: &Scenario,
    config: &ExperimentConfig,
    repetition: u32,
) -> Result<RunRecord, RunError> {
    let seeds = repetition_seeds(config.master_seed, &scenario.id, repetition);
    let split = stratified_split(d0, config.split_ratio, seeds.split)?;
    let checksum = split.test.digest();
    let mut levels = Vec::with_capacity(config.schedule.len());
    for &e in &config.schedule {
        let (train, trace) = match corrupt(&split.train, &scenario.corruption, e, seeds.corruption) {
            Ok(x) => x,
            Err(err) => {
                levels.push(LevelResult {
                    e,
                    p: None,
                    error: Some(err.to_string()),
                    train_rows: split.train.n_rows(),
                    trace_digest: String::new(),
                    test_checksum: split.test.digest(),
                });
                continue;
            }
        };
        let found = split.test.digest();
        if found != checksum {
            return Err(RunError::Integrity {
                scenario: scenario.id.clone(),
                repetition,
                expected: checksum,
                found,
            });
        }
        let outcome = learn::fit(&scenario.model, &train, seeds.model)
            .and_then(|m| learn::performance(&m, &split.test, &config.metric));
        let (p, error) = match outcome {
            Ok(p) => (Some(p), None),
            Err(err) => (None, Some(err.to_string())),
        };
        levels.push(LevelResult {
            e,
            p,
            error,
            train_rows: train.n_rows(),
            trace_digest: trace.digest(),
            test_checksum: found,
        });
    }
    Ok(RunRecord {
        scenario_id: scenario.id.clone(),
        repetition,
        master_seed: config.master_seed,
        split_seed: seeds.split,
        corruption_seed: seeds.corruption,
        model_seed: seeds.model,
        test_checksum: checksum,
        levels,
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Continue an existing store instead of refusing to overwrite it.
    pub resume: bool,
    /// Overrides `config.output_dir`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub store: PathBuf,
    pub scenarios: usize,
    pub repetitions: u32,
    pub executed: usize,
    pub reused: usize,
    pub skipped_specs: Vec<SkippedSpec>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Executes the experiment into its run store, skipping repetitions that
/// are already recorded. When done, `runs.jsonl` is rewritten in canonical
/// (scenario, repetition) order so that its bytes do not depend on the
/// number of workers.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary, RunError> {
    config.validate()?;
    let d0 = load_csv(&config.dataset.path, &config.dataset.target, Some(&config.dataset.schema_hints))?;
    let (specs, skipped) = resolve_specs(config, &d0)?;
    let scenarios = scenarios_from(&specs, &config.models, d0.provenance());
    let dir = options.out.clone().unwrap_or_else(|| config.output_dir.clone());

    let manifest = Manifest::new(config, &d0, scenarios.clone(), skipped.clone());
    let existing = if dir.join(MANIFEST_FILE).exists() {
        if !options.resume {
            return Err(RunError::StoreExists(dir.display().to_string()));
        }
        let store = RunStore::open(&dir)?;
        if store.manifest().config_digest != manifest.config_digest
            || store.manifest().dataset_digest != manifest.dataset_digest
        {
            return Err(RunError::ConfigMismatch(dir.display().to_string()));
        }
        // drop a torn final line before appending after it
        store.canonicalize()?;
        store.into_records()
    } else {
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join(MANIFEST_FILE), manifest.to_json().as_bytes())?;
        File::create(dir.join(RUNS_FILE))?;
        Vec::new()
    };

    let done: std::collections::HashSet<(String, u32)> = existing
        .iter()
        .map(|r| (r.scenario_id.clone(), r.repetition))
        .collect();
    let work: Vec<(usize, u32)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let done = &done;
            (1..=config.repetitions).filter_map(move |n| (!done.contains(&(s.id.clone(), n))).then_some((i, n)))
        })
        .collect();

    let runs = Mutex::new(BufWriter::new(OpenOptions::new().append(true).open(dir.join(RUNS_FILE))?));
    let timings = Mutex::new(BufWriter::new(
        OpenOptions::new().create(true).append(true).open(dir.join(TIMINGS_FILE))?,
    ));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| RunError::validation("workers", e.to_string()))?;
    pool.install(|| {
        work.par_iter().try_for_each(|&(i, n)| -> Result<(), RunError> {
            let started = Instant::now();
            let record = run_repetition(&d0, &scenarios[i], config, n)?;
            let timing = Timing {
                scenario_id: record.scenario_id.clone(),
                repetition: n,
                seconds: started.elapsed().as_secs_f64(),
            };
            {
                let mut w = runs.lock().expect("store writer");
                serde_json::to_writer(&mut *w, &record)?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
            let mut t = timings.lock().expect("timing writer");
            serde_json::to_writer(&mut *t, &timing)?;
            t.write_all(b"\n")?;
            t.flush()?;
            Ok(())
        })
    })?;
    drop(runs);
    drop(timings);

    let store = RunStore::open(&dir)?;
    store.canonicalize()?;
    Ok(RunSummary {
        store: dir,
        scenarios: scenarios.len(),
        repetitions: config.repetitions,
        executed: work.len(),
        reused: done.len(),
        skipped_specs: skipped,
    })
}
