//! Store-level analysis: aggregate profiles per scenario, the two-stage
//! filter for each relevance threshold and a study summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corrupt::correlated_groups;
use crate::error::{EspError, RunError};
use crate::esp::{aggregate, AggregateEsp, EspProfile};
use crate::learn::feature_importance;
use crate::runner::{RunStore, Scenario, Strategy};
use crate::stats::{two_stage_filter, ScenarioOutcome, SignificanceReport};
use crate::tabular::{class_balance, load_csv, ClassShare, Dataset};

/// Threshold used for the correlated-group count when the experiment had
/// no correlated-features strategy.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAnalysis {
    pub scenario: Scenario,
    pub complete_runs: usize,
    /// Repetitions left out because a level is missing or failed.
    pub excluded_runs: Vec<u32>,
    /// Complete runs whose baseline is zero, so AEPC is undefined.
    pub zero_baseline_runs: usize,
    /// Present when at least two runs have a defined profile.
    pub aggregate: Option<AggregateEsp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFacts {
    pub rows: usize,
    pub class_balance: Vec<ClassShare>,
    /// Random-forest importances, highest first.
    pub importance: Vec<(String, f64)>,
    pub correlation_threshold: f64,
    pub correlated_groups: Vec<Vec<String>>,
}

/// The study-level table: one column per relevance threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub delta: f64,
    pub total_scenarios: usize,
    pub significant: usize,
    pub significant_pct: f64,
    pub retained: usize,
    pub retained_pct: f64,
    /// Most frequent model among retained scenarios (ties: alphabetical).
    pub most_sensitive_model: Option<String>,
    /// Share of retained scenarios with positive mean AEPC.
    pub positive_aepc_pct: Option<f64>,
    pub top_feature: Option<(String, f64)>,
    pub correlated_groups: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub delta: f64,
    pub significance: SignificanceReport,
    pub summary: StudySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub config_digest: String,
    pub alpha: f64,
    pub scenarios: Vec<ScenarioAnalysis>,
    pub results: Vec<DeltaResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetFacts>,
}

impl Analysis {
    pub fn scenario(&self, id: &str) -> Option<&ScenarioAnalysis> {
        self.scenarios.iter().find(|s| s.scenario.id == id)
    }

    pub fn result_for(&self, delta: f64) -> Option<&DeltaResult> {
        self.results.iter().find(|r| (r.delta - delta).abs() < 1e-12)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("analysis serializes");
        s.push('\n');
        s
    }

    /// Plain-text table with one column per relevance threshold.
    pub fn render_summary(&self) -> String {
        let mut out = String::new();
        let head: Vec<String> = self.results.iter().map(|r| format!("delta={}", r.delta)).collect();
        let _ = writeln!(out, "{:<28}{}", "", head.iter().map(|h| format!("{h:>18}")).collect::<String>());
        let row = |out: &mut String, name: &str, f: &dyn Fn(&StudySummary) -> String| {
            let cells: String = self.results.iter().map(|r| format!("{:>18}", f(&r.summary))).collect();
            let _ = writeln!(out, "{name:<28}{cells}");
        };
        row(&mut out, "Total scenarios", &|s| s.total_scenarios.to_string());
        row(&mut out, "Significant (BY)", &|s| format!("{} ({:.1}%)", s.significant, s.significant_pct));
        row(&mut out, "Retained (sig. & |AEPC|>d)", &|s| format!("{} ({:.1}%)", s.retained, s.retained_pct));
        row(&mut out, "Most sensitive model", &|s| {
            s.most_sensitive_model.clone().unwrap_or_else(|| "-".into())
        });
        row(&mut out, "Positive mean AEPC", &|s| {
            s.positive_aepc_pct.map_or("-".into(), |p| format!("{p:.1}%"))
        });
        row(&mut out, "Top feature (RF)", &|s| {
            s.top_feature.as_ref().map_or("-".into(), |(n, v)| format!("{n} ({v:.3})"))
        });
        row(&mut out, "Correlated groups", &|s| {
            s.correlated_groups.map_or("-".into(), |g| g.to_string())
        });
        out
    }
}

/// Facts about the clean dataset that the summary table reports.
pub fn dataset_facts(d0: &Dataset, seed: u64, threshold: f64) -> Result<DatasetFacts, RunError> {
    let mut importance = feature_importance(d0, seed)?;
    importance.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(DatasetFacts {
        rows: d0.n_rows(),
        class_balance: class_balance(d0),
        importance,
        correlation_threshold: threshold,
        correlated_groups: correlated_groups(d0, threshold)?,
    })
}

fn analyze_scenario(store: &RunStore, scenario: &Scenario) -> Result<(ScenarioAnalysis, Option<ScenarioOutcome>), RunError> {
    let set = match store.collect_curves(&scenario.id) {
        Ok(set) => set,
        Err(RunError::IncompleteRepetition(_)) => {
            let excluded = store.records_for(&scenario.id).map(|r| r.repetition).collect();
            let a = ScenarioAnalysis {
                scenario: scenario.clone(),
                complete_runs: 0,
                excluded_runs: excluded,
                zero_baseline_runs: 0,
                aggregate: None,
            };
            return Ok((a, None));
        }
        Err(e) => return Err(e),
    };
    let mut profiles = Vec::new();
    let mut zero_baseline = 0;
    for c in &set.curves {
        match EspProfile::compute(c.clone()) {
            Ok(p) => profiles.push(p),
            Err(EspError::ZeroBaseline(_)) => zero_baseline += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let aggregate = if profiles.len() >= 2 {
        Some(aggregate(&profiles)?)
    } else {
        None
    };
    let mean_aepc = if profiles.is_empty() {
        0.0
    } else {
        profiles.iter().map(|p| p.aepc).sum::<f64>() / profiles.len() as f64
    };
    let outcome = ScenarioOutcome {
        scenario_id: scenario.id.clone(),
        baseline_perf: set.curves.iter().map(|c| c.baseline()).collect(),
        max_corruption_perf: set.curves.iter().map(|c| c.points()[c.points().len() - 1].p).collect(),
        mean_aepc,
    };
    let a = ScenarioAnalysis {
        scenario: scenario.clone(),
        complete_runs: set.curves.len(),
        excluded_runs: set.excluded,
        zero_baseline_runs: zero_baseline,
        aggregate,
    };
    Ok((a, Some(outcome)))
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn summarize(
    report: &SignificanceReport,
    scenarios: &[ScenarioAnalysis],
    facts: Option<&DatasetFacts>,
) -> StudySummary {
    let total = report.scenarios.len();
    let retained: Vec<_> = report.retained().collect();
    let mut by_model: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &retained {
        if let Some(s) = scenarios.iter().find(|s| s.scenario.id == v.scenario_id) {
            *by_model.entry(s.scenario.model.label()).or_default() += 1;
        }
    }
    // BTreeMap iterates alphabetically, so the first maximum wins ties
    let most_sensitive_model = by_model
        .iter()
        .fold(None::<(&str, usize)>, |best, (&m, &c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((m, c)),
        })
        .map(|(m, _)| m.to_string());
    StudySummary {
        delta: report.delta,
        total_scenarios: total,
        significant: report.significant_count(),
        significant_pct: pct(report.significant_count(), total),
        retained: retained.len(),
        retained_pct: pct(retained.len(), total),
        most_sensitive_model,
        positive_aepc_pct: (!retained.is_empty())
            .then(|| pct(retained.iter().filter(|v| v.mean_aepc > 0.0).count(), retained.len())),
        top_feature: facts.and_then(|f| f.importance.first().cloned()),
        correlated_groups: facts.map(|f| f.correlated_groups.len()),
    }
}

/// Analyzes every scenario of a store. With `facts`, the summary also
/// reports the top feature and the correlated-group count.
pub fn analyze_store(
    store: &RunStore,
    alpha: f64,
    deltas: &[f64],
    facts: Option<DatasetFacts>,
) -> Result<Analysis, RunError> {
    let has_corrupted_level = store
        .records()
        .iter()
        .any(|r| r.levels.iter().any(|l| l.e > 0.0 && l.p.is_some()));
    if !has_corrupted_level {
        return Err(RunError::EmptyStore);
    }
    let mut scenarios = Vec::new();
    let mut outcomes = Vec::new();
    for s in store.scenarios() {
        if store.records_for(&s.id).next().is_none() {
            continue;
        }
        let (a, o) = analyze_scenario(store, s)?;
        scenarios.push(a);
        outcomes.extend(o);
    }
    if outcomes.is_empty() {
        return Err(RunError::EmptyStore);
    }
    let mut results = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let significance = two_stage_filter(&outcomes, alpha, delta)?;
        let summary = summarize(&significance, &scenarios, facts.as_ref());
        results.push(DeltaResult {
            delta,
            significance,
            summary,
        });
    }
    Ok(Analysis {
        config_digest: store.manifest().config_digest.clone(),
        alpha,
        scenarios,
        results,
        dataset: facts,
    })
}

/// [`analyze_store`] plus dataset facts computed from the store's dataset,
/// when that file is still readable and unchanged.
pub fn analyze(store: &RunStore, alpha: f64, deltas: &[f64]) -> Result<Analysis, RunError> {
    let config = store.config();
    let threshold = config
        .strategies
        .iter()
        .find_map(|s| match s {
            Strategy::CorrelatedFeatures { threshold, .. } => Some(*threshold),
            _ => None,
        })
        .unwrap_or(DEFAULT_CORRELATION_THRESHOLD);
    let facts = match load_csv(&config.dataset.path, &config.dataset.target, Some(&config.dataset.schema_hints)) {
        Ok(d0) if d0.digest() == store.manifest().dataset_digest => {
            Some(dataset_facts(&d0, config.master_seed, threshold)?)
        }
        _ => None,
    };
    analyze_store(store, alpha, deltas, facts)
}
