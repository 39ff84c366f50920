//! Error-performance curves and their sensitivity profile: the negated
//! correlation (EPC), the baseline-normalised signed area (AEPC) and the
//! slopes of locally monotone regions.

mod interchange;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub use interchange::{export_curves, import_curves, read_curves, write_curves};

use crate::error::EspError;
use crate::learn::PerfMetric;

/// Baselines at or below this are treated as zero.
pub const BASELINE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Severity in percent.
    pub e: f64,
    /// Metric value in `[0, 1]`.
    pub p: f64,
}

/// Performance measured at each severity of one run. The first point is
/// always the uncorrupted baseline at `e = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPerformanceCurve {
    points: Vec<CurvePoint>,
    metric: PerfMetric,
    run_seed: u64,
}

impl ErrorPerformanceCurve {
    pub fn new(points: Vec<CurvePoint>, metric: PerfMetric, run_seed: u64) -> Result<Self, EspError> {
        if points.len() < 2 {
            return Err(EspError::TooFewPoints(points.len()));
        }
        if points[0].e != 0.0 {
            return Err(EspError::InvalidCurve(format!("first level must be 0, got {}", points[0].e)));
        }
        for (k, pt) in points.iter().enumerate() {
            if !pt.e.is_finite() || !pt.p.is_finite() {
                return Err(EspError::InvalidCurve(format!("point {k} is not finite")));
            }
            if !(0.0..=1.0).contains(&pt.p) {
                return Err(EspError::InvalidCurve(format!("p at point {k} is {} (outside [0, 1])", pt.p)));
            }
        }
        if let Some(k) = points.windows(2).position(|w| w[1].e <= w[0].e) {
            return Err(EspError::InvalidCurve(format!(
                "levels must be strictly increasing ({} then {})",
                points[k].e,
                points[k + 1].e
            )));
        }
        Ok(Self {
            points,
            metric,
            run_seed,
        })
    }

    /// Curve from parallel level/value slices, scored with F1 and seed 0.
    pub fn from_pairs(e: &[f64], p: &[f64]) -> Result<Self, EspError> {
        if e.len() != p.len() {
            return Err(EspError::InvalidCurve(format!("{} levels but {} values", e.len(), p.len())));
        }
        let points = e.iter().zip(p).map(|(&e, &p)| CurvePoint { e, p }).collect();
        Self::new(points, PerfMetric::f1(), 0)
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn levels(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.e).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.p).collect()
    }

    pub fn metric(&self) -> &PerfMetric {
        &self.metric
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    pub fn baseline(&self) -> f64 {
        self.points[0].p
    }

    pub fn e_max(&self) -> f64 {
        self.points[self.points.len() - 1].e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epc {
    pub value: f64,
    /// Set when either sequence has zero variance; `value` is then 0.
    pub degenerate: bool,
}

/// Negated Pearson correlation between severity and performance.
pub fn epc(curve: &ErrorPerformanceCurve) -> Epc {
    let n = curve.points.len() as f64;
    let (me, mp) = curve
        .points
        .iter()
        .fold((0.0, 0.0), |(a, b), pt| (a + pt.e / n, b + pt.p / n));
    let (mut see, mut spp, mut sep) = (0.0, 0.0, 0.0);
    for pt in &curve.points {
        let (de, dp) = (pt.e - me, pt.p - mp);
        see += de * de;
        spp += dp * dp;
        sep += de * dp;
    }
    if see == 0.0 || spp == 0.0 {
        return Epc {
            value: 0.0,
            degenerate: true,
        };
    }
    let r = (sep / (see.sqrt() * spp.sqrt())).clamp(-1.0, 1.0);
    Epc {
        value: -r,
        degenerate: false,
    }
}

/// Trapezoidal area of `p(e) - p0` over `[0, e_max]`, divided by `p0 * e_max`.
pub fn aepc(curve: &ErrorPerformanceCurve) -> Result<f64, EspError> {
    let p0 = curve.baseline();
    if p0 <= BASELINE_TOLERANCE {
        return Err(EspError::ZeroBaseline(p0));
    }
    let area: f64 = curve
        .points
        .windows(2)
        .map(|w| (w[1].e - w[0].e) * ((w[0].p - p0) + (w[1].p - p0)) / 2.0)
        .sum();
    Ok(area / (p0 * curve.e_max()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeRegion {
    pub start: f64,
    pub end: f64,
    pub start_index: usize,
    pub end_index: usize,
    /// OLS slope of p on e, in metric units per percentage point.
    pub beta: f64,
    /// A two-point region: the slope only indicates direction.
    pub directional: bool,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Interior indices where the direction of the curve changes. Flat steps
/// take the direction of the previous step; a leading flat run takes the
/// first non-flat direction.
pub fn turning_points(p: &[f64]) -> Vec<usize> {
    let mut signs: Vec<i8> = p.windows(2).map(|w| sign(w[1] - w[0])).collect();
    let Some(first) = signs.iter().copied().find(|&s| s != 0) else {
        return Vec::new();
    };
    let mut last = first;
    for s in signs.iter_mut() {
        if *s == 0 {
            *s = last;
        } else {
            last = *s;
        }
    }
    // signs[k] is the step from point k to k+1
    (1..signs.len()).filter(|&k| signs[k - 1] != signs[k]).collect()
}

fn ols_slope(e: &[f64], p: &[f64]) -> f64 {
    let n = e.len() as f64;
    let me = e.iter().sum::<f64>() / n;
    let mp = p.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in e.iter().zip(p) {
        num += (x - me) * (y - mp);
        den += (x - me) * (x - me);
    }
    num / den
}

/// Fits one OLS slope per region delimited by the given interior cut indices.
pub fn slopes_between(curve: &ErrorPerformanceCurve, cuts: &[usize]) -> Vec<SlopeRegion> {
    let e = curve.levels();
    let p = curve.values();
    let last = e.len() - 1;
    let mut bounds = vec![0];
    bounds.extend(cuts.iter().copied().filter(|&c| c > 0 && c < last));
    bounds.push(last);
    bounds.dedup();
    bounds
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            SlopeRegion {
                start: e[a],
                end: e[b],
                start_index: a,
                end_index: b,
                beta: ols_slope(&e[a..=b], &p[a..=b]),
                directional: b - a == 1,
            }
        })
        .collect()
}

/// Maximal monotone regions of the curve with their OLS slopes.
pub fn piecewise_slopes(curve: &ErrorPerformanceCurve) -> Vec<SlopeRegion> {
    slopes_between(curve, &turning_points(&curve.values()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EspProfile {
    pub epc: Epc,
    pub aepc: f64,
    pub slopes: Vec<SlopeRegion>,
    pub curve: ErrorPerformanceCurve,
}

impl EspProfile {
    pub fn compute(curve: ErrorPerformanceCurve) -> Result<Self, EspError> {
        Ok(Self {
            epc: epc(&curve),
            aepc: aepc(&curve)?,
            slopes: piecewise_slopes(&curve),
            curve,
        })
    }

    pub fn metric(&self) -> &PerfMetric {
        &self.curve.metric
    }
}

/// Mean with a two-sided 95% Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self, EspError> {
        let n = values.len();
        if n < 2 {
            return Err(EspError::TooFewRuns(n));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        let half = t_quantile_975(n - 1) * sd / (n as f64).sqrt();
        Ok(Self {
            n,
            mean,
            sd,
            ci_low: mean - half,
            ci_high: mean + half,
        })
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// 0.975 quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile_975(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub e: f64,
    pub p: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub start: f64,
    pub end: f64,
    pub directional: bool,
    pub beta: Summary,
}

/// Cross-run profile: component-wise means with 95% t-intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateEsp {
    pub n_runs: usize,
    pub metric: PerfMetric,
    pub epc: Summary,
    /// Runs whose EPC was degenerate (they contribute 0 to the mean).
    pub degenerate_epc_runs: usize,
    pub aepc: Summary,
    pub curve: Vec<LevelSummary>,
    pub slopes: Vec<RegionSummary>,
    /// How regions were aligned across runs before averaging slopes.
    pub segmentation: String,
}

impl AggregateEsp {
    pub fn baseline(&self) -> f64 {
        self.curve[0].p.mean
    }
}

/// Aggregates per-run profiles. Slopes are averaged region by region after
/// cutting every run at the union of all runs' turning levels, so that all
/// runs share the same regions.
pub fn aggregate(profiles: &[EspProfile]) -> Result<AggregateEsp, EspError> {
    if profiles.len() < 2 {
        return Err(EspError::TooFewRuns(profiles.len()));
    }
    let levels = profiles[0].curve.levels();
    let metric = profiles[0].metric().clone();
    for pr in &profiles[1..] {
        if pr.curve.levels() != levels {
            return Err(EspError::MixedSchedules);
        }
        if *pr.metric() != metric {
            return Err(EspError::MixedMetrics);
        }
    }

    let epcs: Vec<f64> = profiles.iter().map(|p| p.epc.value).collect();
    let aepcs: Vec<f64> = profiles.iter().map(|p| p.aepc).collect();
    let curve = (0..levels.len())
        .map(|k| {
            let ps: Vec<f64> = profiles.iter().map(|pr| pr.curve.points[k].p).collect();
            Ok(LevelSummary {
                e: levels[k],
                p: Summary::of(&ps)?,
            })
        })
        .collect::<Result<Vec<_>, EspError>>()?;

    let mut cuts: Vec<usize> = profiles
        .iter()
        .flat_map(|pr| pr.slopes.iter().skip(1).map(|r| r.start_index))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let per_run: Vec<Vec<SlopeRegion>> = profiles.iter().map(|pr| slopes_between(&pr.curve, &cuts)).collect();
    let slopes = (0..per_run[0].len())
        .map(|j| {
            let betas: Vec<f64> = per_run.iter().map(|r| r[j].beta).collect();
            let r = per_run[0][j];
            Ok(RegionSummary {
                start: r.start,
                end: r.end,
                directional: r.directional,
                beta: Summary::of(&betas)?,
            })
        })
        .collect::<Result<Vec<_>, EspError>>()?;

    Ok(AggregateEsp {
        n_runs: profiles.len(),
        metric,
        epc: Summary::of(&epcs)?,
        degenerate_epc_runs: profiles.iter().filter(|p| p.epc.degenerate).count(),
        aepc: Summary::of(&aepcs)?,
        curve,
        slopes,
        segmentation: "union_of_run_boundaries".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: [f64; 5] = [0.0, 20.0, 40.0, 60.0, 80.0];

    fn curve(p: &[f64]) -> ErrorPerformanceCurve {
        ErrorPerformanceCurve::from_pairs(&E, p).unwrap()
    }

    #[test]
    fn epc_examples() {
        assert_eq!(epc(&curve(&[1.0, 0.9, 0.8, 0.7, 0.6])).value, 1.0);
        assert_eq!(epc(&curve(&[0.6, 0.7, 0.8, 0.9, 1.0])).value, -1.0);
        let flat = epc(&curve(&[0.8; 5]));
        assert_eq!(flat.value, 0.0);
        assert!(flat.degenerate);
    }

    #[test]
    fn aepc_examples() {
        assert!((aepc(&curve(&[1.0, 0.9, 0.8, 0.7, 0.6])).unwrap() + 0.2).abs() < 1e-12);
        assert_eq!(aepc(&curve(&[0.7; 5])).unwrap(), 0.0);
        // step loss of 10% at every level after 0: first trapezoid averages in half
        let a = aepc(&curve(&[1.0, 0.9, 0.9, 0.9, 0.9])).unwrap();
        assert!((a - (-(0.5 * 20.0 * 0.1 + 60.0 * 0.1) / 80.0)).abs() < 1e-12);
        assert!(matches!(aepc(&curve(&[0.0, 0.1, 0.2, 0.3, 0.4])), Err(EspError::ZeroBaseline(_))));
    }

    #[test]
    fn slopes_worked_example() {
        let r = piecewise_slopes(&curve(&[0.8, 0.6, 0.7, 0.9, 0.5]));
        let spans: Vec<(f64, f64)> = r.iter().map(|r| (r.start, r.end)).collect();
        assert_eq!(spans, vec![(0.0, 20.0), (20.0, 60.0), (60.0, 80.0)]);
        let expected = [-0.010, 0.0075, -0.020];
        for (r, b) in r.iter().zip(expected) {
            assert!((r.beta - b).abs() < 1e-12, "{} vs {b}", r.beta);
        }
        assert!(r[0].directional && !r[1].directional && r[2].directional);
    }

    #[test]
    fn slopes_line_and_flat() {
        let r = piecewise_slopes(&curve(&[1.0, 0.9, 0.8, 0.7, 0.6]));
        assert_eq!(r.len(), 1);
        assert!((r[0].beta + 0.005).abs() < 1e-12);
        let r = piecewise_slopes(&curve(&[0.5; 5]));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].beta, 0.0);
    }

    #[test]
    fn plateaus_do_not_split_regions() {
        assert!(turning_points(&[0.5, 0.5, 0.4, 0.4, 0.3]).is_empty());
        assert_eq!(turning_points(&[0.5, 0.6, 0.6, 0.4]), vec![2]);
        assert!(turning_points(&[0.5, 0.5, 0.5, 0.6]).is_empty());
    }

    #[test]
    fn curve_validation() {
        assert!(matches!(
            ErrorPerformanceCurve::from_pairs(&[0.0], &[0.5]),
            Err(EspError::TooFewPoints(1))
        ));
        assert!(ErrorPerformanceCurve::from_pairs(&[0.0, 20.0, 20.0], &[0.5; 3]).is_err());
        assert!(ErrorPerformanceCurve::from_pairs(&[0.0, 40.0, 20.0], &[0.5; 3]).is_err());
        assert!(ErrorPerformanceCurve::from_pairs(&[10.0, 20.0], &[0.5; 2]).is_err());
        assert!(ErrorPerformanceCurve::from_pairs(&[0.0, 20.0], &[0.5, 1.5]).is_err());
    }

    #[test]
    fn aggregate_of_identical_profiles_has_zero_width() {
        let pr = EspProfile::compute(curve(&[0.9, 0.8, 0.85, 0.7, 0.6])).unwrap();
        let agg = aggregate(&[pr.clone(), pr.clone(), pr.clone()]).unwrap();
        assert_eq!(agg.epc.mean, pr.epc.value);
        assert_eq!(agg.epc.ci_low, agg.epc.ci_high);
        assert!((agg.aepc.mean - pr.aepc).abs() < 1e-15);
        assert_eq!(agg.slopes.len(), pr.slopes.len());
    }

    #[test]
    fn t_interval_oracle() {
        let s = Summary::of(&[0.8, 0.6]).unwrap();
        assert!((s.mean - 0.7).abs() < 1e-12);
        assert!((s.sd - 0.02f64.sqrt()).abs() < 1e-12);
        // t(0.975, 1) = 12.7062047...
        assert!((s.half_width() - 12.706_204_736 * 0.02f64.sqrt() / 2f64.sqrt()).abs() < 1e-6);
        assert!(matches!(Summary::of(&[1.0]), Err(EspError::TooFewRuns(1))));
    }

    #[test]
    fn aggregate_rejects_mixed_inputs() {
        let a = EspProfile::compute(curve(&[0.9, 0.8, 0.7, 0.6, 0.5])).unwrap();
        let b = EspProfile::compute(
            ErrorPerformanceCurve::from_pairs(&[0.0, 10.0, 20.0], &[0.9, 0.8, 0.7]).unwrap(),
        )
        .unwrap();
        assert!(matches!(aggregate(&[a.clone(), b]), Err(EspError::MixedSchedules)));
        let c = EspProfile::compute(
            ErrorPerformanceCurve::new(a.curve.points().to_vec(), PerfMetric::Accuracy, 1).unwrap(),
        )
        .unwrap();
        assert!(matches!(aggregate(&[a.clone(), c]), Err(EspError::MixedMetrics)));
        assert!(matches!(aggregate(&[a]), Err(EspError::TooFewRuns(1))));
    }

    #[test]
    fn union_grid_aligns_disagreeing_runs() {
        let a = EspProfile::compute(curve(&[0.9, 0.8, 0.85, 0.7, 0.6])).unwrap();
        let b = EspProfile::compute(curve(&[0.9, 0.8, 0.7, 0.75, 0.6])).unwrap();
        let agg = aggregate(&[a, b]).unwrap();
        let spans: Vec<(f64, f64)> = agg.slopes.iter().map(|r| (r.start, r.end)).collect();
        assert_eq!(spans, vec![(0.0, 20.0), (20.0, 40.0), (40.0, 60.0), (60.0, 80.0)]);
    }
}
