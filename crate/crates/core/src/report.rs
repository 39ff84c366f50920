//! Canonical single-scenario report: JSON numbers plus an SVG chart of the
//! mean curve, its 95% band, the baseline and the per-region slopes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{Analysis, ScenarioAnalysis};
use crate::error::RunError;
use crate::esp::{LevelSummary, RegionSummary, Summary};
use crate::stats::ScenarioVerdict;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReport {
    pub scenario_id: String,
    pub model: String,
    pub error_type: String,
    pub features: Vec<String>,
    pub metric: String,
    pub n_runs: usize,
    pub baseline: f64,
    pub epc: Summary,
    pub aepc: Summary,
    pub curve: Vec<LevelSummary>,
    pub regions: Vec<RegionSummary>,
    pub segmentation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ScenarioVerdict>,
}

impl CanonicalReport {
    pub fn from_scenario(a: &ScenarioAnalysis, verdict: Option<ScenarioVerdict>) -> Result<Self, RunError> {
        let agg = a
            .aggregate
            .as_ref()
            .ok_or_else(|| RunError::IncompleteRepetition(a.scenario.id.clone()))?;
        Ok(Self {
            scenario_id: a.scenario.id.clone(),
            model: a.scenario.model.label().to_string(),
            error_type: a.scenario.corruption.error_type.to_string(),
            features: a.scenario.corruption.features.clone(),
            metric: agg.metric.to_string(),
            n_runs: agg.n_runs,
            baseline: agg.baseline(),
            epc: agg.epc,
            aepc: agg.aepc,
            curve: agg.curve.clone(),
            regions: agg.slopes.clone(),
            segmentation: agg.segmentation.clone(),
            verdict,
        })
    }

    /// Report for `id`, with the verdict at `delta` (the first threshold if `None`).
    pub fn from_analysis(analysis: &Analysis, id: &str, delta: Option<f64>) -> Result<Self, RunError> {
        let a = analysis
            .scenario(id)
            .ok_or_else(|| RunError::ScenarioNotFound(id.to_string()))?;
        let result = match delta {
            Some(d) => analysis.result_for(d),
            None => analysis.results.first(),
        };
        let verdict = result.and_then(|r| r.significance.scenarios.iter().find(|v| v.scenario_id == id).cloned());
        Self::from_scenario(a, verdict)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn title(&self) -> String {
        if self.features.is_empty() {
            format!("{} / {}", self.model, self.error_type)
        } else {
            format!("{} / {} [{}]", self.model, self.error_type, self.features.join(", "))
        }
    }

    pub fn to_svg(&self) -> String {
        render_svg(self)
    }
}

/// Fixed precision used for every number printed in the SVG.
pub const PRINT_DECIMALS: usize = 4;

pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.PRINT_DECIMALS$}");
    // avoid "-0.0000"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 80.0;
const BOTTOM: f64 = 60.0;

struct Frame {
    e_max: f64,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, e: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * e / self.e_max
    }

    fn y(&self, p: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (self.hi - p) / (self.hi - self.lo)
    }
}

fn frame(r: &CanonicalReport) -> Frame {
    let e_max = r.curve.last().map_or(1.0, |l| l.e).max(1e-9);
    let mut lo = r.baseline;
    let mut hi = r.baseline;
    for l in &r.curve {
        lo = lo.min(l.p.ci_low).min(l.p.mean);
        hi = hi.max(l.p.ci_high).max(l.p.mean);
    }
    let pad = ((hi - lo) * 0.1).max(0.01);
    Frame {
        e_max,
        lo: (lo - pad).max(0.0).min(lo),
        hi: (hi + pad).min(1.0).max(hi),
    }
}

/// Number annotation carrying its report field in `data-key` and the
/// printed value in `data-value`.
#[allow(clippy::too_many_arguments)]
fn annotation(out: &mut String, key: &str, x: f64, y: f64, anchor: &str, class: &str, text: &str, value: f64) {
    let _ = writeln!(
        out,
        r#"  <text class="{class}" x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" data-key="{key}" data-value="{v}">{t}</text>"#,
        v = fmt_num(value),
        t = escape_xml(text),
    );
}

pub fn render_svg(r: &CanonicalReport) -> String {
    let f = frame(r);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "  <title>{}</title>", escape_xml(&r.title()));
    let _ = writeln!(
        out,
        "  <style>.band{{fill:#9ecae1;fill-opacity:0.45;stroke:none}} .mean{{fill:none;stroke:#08519c;stroke-width:2}} \
.baseline{{stroke:#636363;stroke-dasharray:6 4}} .boundary{{stroke:#d94801;stroke-dasharray:3 3}} \
.axis{{stroke:#252525}} .slope{{fill:#d94801}} .header{{font-size:13px}}</style>"
    );
    let _ = writeln!(out, r##"  <rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"  <text class="title" x="{LEFT}" y="24" font-size="15" font-weight="bold">{}</text>"#,
        escape_xml(&r.title())
    );

    // header: EPC and AEPC with their intervals
    let mut hx = LEFT;
    for (name, s) in [("epc", &r.epc), ("aepc", &r.aepc)] {
        let label = name.to_uppercase();
        let text = format!("{label} = {}", fmt_num(s.mean));
        annotation(&mut out, &format!("{name}.mean"), hx, 48.0, "start", "header", &text, s.mean);
        let lo = format!("[{}", fmt_num(s.ci_low));
        annotation(&mut out, &format!("{name}.ci_low"), hx + 120.0, 48.0, "start", "header", &lo, s.ci_low);
        let hi = format!("{}]", fmt_num(s.ci_high));
        annotation(&mut out, &format!("{name}.ci_high"), hx + 190.0, 48.0, "start", "header", &hi, s.ci_high);
        hx += 300.0;
    }
    let _ = writeln!(
        out,
        r##"  <text class="meta" x="{LEFT}" y="66" fill="#525252">{} · N = {} runs · 95% t-interval</text>"##,
        escape_xml(&r.metric),
        r.n_runs
    );

    // axes
    let (x0, x1) = (f.x(0.0), f.x(f.e_max));
    let (y0, y1) = (f.y(f.lo), f.y(f.hi));
    let _ = writeln!(out, r#"  <line class="axis" x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}"/>"#);
    let _ = writeln!(out, r#"  <line class="axis" x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}"/>"#);
    for l in &r.curve {
        let x = f.x(l.e);
        let _ = writeln!(
            out,
            r#"  <text class="tick" x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            l.e
        );
    }
    for i in 0..=4 {
        let p = f.lo + (f.hi - f.lo) * i as f64 / 4.0;
        let y = f.y(p);
        let _ = writeln!(
            out,
            r#"  <text class="tick" x="{:.1}" y="{:.1}" text-anchor="end">{:.2}</text>"#,
            x0 - 6.0,
            y + 4.0,
            p
        );
    }
    let _ = writeln!(
        out,
        r#"  <text x="{:.1}" y="{:.1}" text-anchor="middle">error level e (%)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape_xml(&r.metric)
    );

    // confidence band
    let mut band: Vec<String> = r.curve.iter().map(|l| format!("{:.2},{:.2}", f.x(l.e), f.y(l.p.ci_high))).collect();
    band.extend(r.curve.iter().rev().map(|l| format!("{:.2},{:.2}", f.x(l.e), f.y(l.p.ci_low))));
    let _ = writeln!(out, r#"  <polygon class="band" points="{}"/>"#, band.join(" "));

    // baseline
    let yb = f.y(r.baseline);
    let _ = writeln!(out, r#"  <line class="baseline" x1="{x0:.1}" y1="{yb:.1}" x2="{x1:.1}" y2="{yb:.1}"/>"#);
    annotation(
        &mut out,
        "baseline",
        x1,
        yb - 6.0,
        "end",
        "baseline-label",
        &format!("p0 = {}", fmt_num(r.baseline)),
        r.baseline,
    );

    // mean curve
    let line: Vec<String> = r.curve.iter().map(|l| format!("{:.2},{:.2}", f.x(l.e), f.y(l.p.mean))).collect();
    let _ = writeln!(out, r#"  <polyline class="mean" points="{}"/>"#, line.join(" "));
    for (k, l) in r.curve.iter().enumerate() {
        let _ = writeln!(
            out,
            r##"  <circle cx="{:.2}" cy="{:.2}" r="3" fill="#08519c" data-key="curve[{k}].p.mean" data-value="{}"/>"##,
            f.x(l.e),
            f.y(l.p.mean),
            fmt_num(l.p.mean)
        );
    }

    // region boundaries and slopes
    for (j, reg) in r.regions.iter().enumerate() {
        if j > 0 {
            let xb = f.x(reg.start);
            let _ = writeln!(out, r#"  <line class="boundary" x1="{xb:.1}" y1="{y0:.1}" x2="{xb:.1}" y2="{y1:.1}"/>"#);
        }
        let xm = (f.x(reg.start) + f.x(reg.end)) / 2.0;
        let text = format!("β{} = {}", j + 1, fmt_num(reg.beta.mean));
        annotation(&mut out, &format!("regions[{j}].beta.mean"), xm, y1 + 14.0, "middle", "slope", &text, reg.beta.mean);
    }
    out.push_str("</svg>\n");
    out
}
