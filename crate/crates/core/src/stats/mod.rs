//! Scenario filtering: paired Wilcoxon signed-rank tests between baseline and
//! maximum-severity performance, Benjamini-Yekutieli adjustment across
//! scenarios, then an |AEPC| relevance cut.

mod wilcoxon;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use wilcoxon::{
    midranks, signed_rank, wilcoxon_signed_rank, wilcoxon_with, WilcoxonMethod, WilcoxonResult, EXACT_LIMIT,
    MIN_PAIRS,
};

use crate::error::StatsError;

/// `c(m) = 1 + 1/2 + ... + 1/m`.
pub fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByAdjustment {
    /// Adjusted p-values, in input order.
    pub adjusted: Vec<f64>,
    pub rejected: Vec<bool>,
    pub m: usize,
    pub c_m: f64,
}

fn check_level(name: &'static str, value: f64) -> Result<(), StatsError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidLevel { name, value })
    }
}

/// Benjamini-Yekutieli step-up adjustment:
/// `adj_(i) = min(1, min_{j >= i} m c(m) p_(j) / j)`.
pub fn benjamini_yekutieli(p_values: &[f64], alpha: f64) -> Result<ByAdjustment, StatsError> {
    check_level("alpha", alpha)?;
    let m = p_values.len();
    if m == 0 {
        return Err(StatsError::EmptyInput);
    }
    if let Some((index, &value)) = p_values.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::PValueOutOfRange { index, value });
    }
    let c_m = harmonic(m);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = f64::INFINITY;
    for (rank0, &idx) in order.iter().enumerate().rev() {
        let candidate = m as f64 * c_m * p_values[idx] / (rank0 + 1) as f64;
        running = running.min(candidate);
        adjusted[idx] = running.min(1.0);
    }
    let rejected = adjusted.iter().map(|&a| a <= alpha).collect();
    Ok(ByAdjustment {
        adjusted,
        rejected,
        m,
        c_m,
    })
}

/// Paired baseline/max-severity performance of one scenario across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario_id: String,
    pub baseline_perf: Vec<f64>,
    pub max_corruption_perf: Vec<f64>,
    pub mean_aepc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioVerdict {
    pub scenario_id: String,
    pub n_pairs: usize,
    pub n_effective: usize,
    pub statistic: f64,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub mean_aepc: f64,
    pub significant: bool,
    pub relevant: bool,
    pub retained: bool,
    /// `all_zero_differences` or `insufficient_pairs` when the test could not run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub alpha: f64,
    pub delta: f64,
    pub m: usize,
    pub c_m: f64,
    pub test: String,
    pub zero_handling: String,
    pub scenarios: Vec<ScenarioVerdict>,
}

impl SignificanceReport {
    pub fn retained(&self) -> impl Iterator<Item = &ScenarioVerdict> {
        self.scenarios.iter().filter(|s| s.retained)
    }

    pub fn retained_ids(&self) -> Vec<&str> {
        self.retained().map(|s| s.scenario_id.as_str()).collect()
    }

    pub fn significant_count(&self) -> usize {
        self.scenarios.iter().filter(|s| s.significant).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per scenario.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "scenario_id",
            "n_pairs",
            "n_effective",
            "statistic",
            "raw_p",
            "adjusted_p",
            "mean_aepc",
            "significant",
            "relevant",
            "retained",
            "note",
        ])?;
        for s in &self.scenarios {
            w.write_record([
                s.scenario_id.clone(),
                s.n_pairs.to_string(),
                s.n_effective.to_string(),
                s.statistic.to_string(),
                s.raw_p.to_string(),
                s.adjusted_p.to_string(),
                s.mean_aepc.to_string(),
                s.significant.to_string(),
                s.relevant.to_string(),
                s.retained.to_string(),
                s.note.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Stage one: Wilcoxon per scenario, BY across scenarios at `alpha`.
/// Stage two: `|mean_aepc| > delta`. Scenarios with fewer than
/// [`MIN_PAIRS`] runs stay in the report with p = 1 and a note.
pub fn two_stage_filter(
    outcomes: &[ScenarioOutcome],
    alpha: f64,
    delta: f64,
) -> Result<SignificanceReport, StatsError> {
    check_level("alpha", alpha)?;
    check_level("delta", delta)?;
    if outcomes.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut tests = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let n = o.baseline_perf.len();
        if n != o.max_corruption_perf.len() {
            return Err(StatsError::LengthMismatch {
                left: n,
                right: o.max_corruption_perf.len(),
            });
        }
        if n < MIN_PAIRS {
            tests.push((None, Some("insufficient_pairs")));
            continue;
        }
        let r = wilcoxon_signed_rank(&o.baseline_perf, &o.max_corruption_perf)?;
        let note = r.all_zero.then_some("all_zero_differences");
        tests.push((Some(r), note));
    }
    let raw: Vec<f64> = tests.iter().map(|(r, _)| r.map_or(1.0, |r| r.p_value)).collect();
    let by = benjamini_yekutieli(&raw, alpha)?;
    let scenarios = outcomes
        .iter()
        .zip(&tests)
        .enumerate()
        .map(|(i, (o, (r, note)))| {
            let significant = by.rejected[i] && r.is_some_and(|r| !r.all_zero);
            let relevant = o.mean_aepc.abs() > delta;
            ScenarioVerdict {
                scenario_id: o.scenario_id.clone(),
                n_pairs: o.baseline_perf.len(),
                n_effective: r.map_or(0, |r| r.n_effective),
                statistic: r.map_or(0.0, |r| r.statistic),
                raw_p: raw[i],
                adjusted_p: by.adjusted[i],
                mean_aepc: o.mean_aepc,
                significant,
                relevant,
                retained: significant && relevant,
                note: note.map(String::from),
            }
        })
        .collect();
    Ok(SignificanceReport {
        alpha,
        delta,
        m: by.m,
        c_m: by.c_m,
        test: "wilcoxon_signed_rank_two_sided".into(),
        zero_handling: "drop_zero_differences".into(),
        scenarios,
    })
}
