use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LearnError;

/// Performance metric. F1 is computed for `positive_class`, which defaults
/// to the second class label (e.g. `TRUE`, `1`, `yes`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "lowercase")]
pub enum PerfMetric {
    F1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        positive_class: Option<String>,
    },
    Accuracy,
}

impl Default for PerfMetric {
    fn default() -> Self {
        PerfMetric::F1 {
            positive_class: None,
        }
    }
}

impl PerfMetric {
    pub fn f1() -> Self {
        Self::default()
    }

    pub fn name(&self) -> &'static str {
        match self {
            PerfMetric::F1 { .. } => "f1",
            PerfMetric::Accuracy => "accuracy",
        }
    }

    /// Index of the positive class among `classes`.
    pub fn positive_index(&self, classes: &[String]) -> Result<usize, LearnError> {
        match self {
            PerfMetric::F1 {
                positive_class: Some(c),
            } => classes
                .iter()
                .position(|l| l == c)
                .ok_or_else(|| LearnError::UnknownPositiveClass(c.clone())),
            _ => Ok(1),
        }
    }

    /// Scores predicted against true class indices (0/1).
    pub fn score(
        &self,
        predicted: &[usize],
        truth: &[usize],
        positive: usize,
    ) -> Result<f64, LearnError> {
        if truth.is_empty() {
            return Err(LearnError::EmptyTest);
        }
        let c = Confusion::tally(predicted, truth, positive);
        Ok(match self {
            PerfMetric::F1 { .. } => c.f1(),
            PerfMetric::Accuracy => c.accuracy(),
        })
    }
}

impl fmt::Display for PerfMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerfMetric::F1 {
                positive_class: Some(c),
            } => write!(f, "f1({c})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(predicted: &[usize], truth: &[usize], positive: usize) -> Self {
        let mut c = Confusion::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p == positive, t == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    /// 2PR/(P+R); 0 when precision and recall are both 0 or undefined.
    pub fn f1(&self) -> f64 {
        let precision = if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let recall = if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.tp + self.fp + self.tn + self.fn_;
        (self.tp + self.tn) as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 1, 0];
        assert_eq!(PerfMetric::f1().score(&y, &y, 1).unwrap(), 1.0);
        assert_eq!(PerfMetric::Accuracy.score(&y, &y, 1).unwrap(), 1.0);
    }

    #[test]
    fn never_positive_gives_zero_f1() {
        assert_eq!(PerfMetric::f1().score(&[0, 0, 0], &[1, 0, 1], 1).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_confusion() {
        // TP=2, FP=1, FN=1, TN=1
        let pred = [1, 1, 1, 0, 0];
        let truth = [1, 1, 0, 1, 0];
        let c = Confusion::tally(&pred, &truth, 1);
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (2, 1, 1, 1));
        let p = 2.0 / 3.0;
        let expected = 2.0 * p * p / (p + p);
        assert!((c.f1() - expected).abs() < 1e-15);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_test() {
        assert!(matches!(PerfMetric::Accuracy.score(&[], &[], 1), Err(LearnError::EmptyTest)));
    }

    #[test]
    fn json_layout() {
        let m: PerfMetric = serde_json::from_str(r#"{"metric":"f1","positive_class":"TRUE"}"#).unwrap();
        assert_eq!(m.positive_index(&["FALSE".into(), "TRUE".into()]).unwrap(), 1);
        assert_eq!(serde_json::to_string(&PerfMetric::f1()).unwrap(), r#"{"metric":"f1"}"#);
        assert!(PerfMetric::F1 { positive_class: Some("x".into()) }
            .positive_index(&["a".into(), "b".into()])
            .is_err());
    }
}
