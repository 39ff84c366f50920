//! Fixed-hyperparameter binary classifiers, their preprocessing and metrics.

mod bayes;
mod discriminant;
mod knn;
mod linear;
mod matrix;
mod metrics;
mod preprocess;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bayes::GaussianNb;
pub use discriminant::{Lda, Qda};
pub use knn::Knn;
pub use linear::{fit_logistic, fit_ridge, fit_sgd, logistic_loss, LinearModel};
pub use matrix::Matrix;
pub use metrics::{Confusion, PerfMetric};
pub use preprocess::{Encoding, Preprocessor};
pub use tree::{DecisionTree, RandomForest, TreeParams};

use crate::error::LearnError;
use crate::tabular::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbParams {
    pub var_smoothing: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self {
            var_smoothing: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnParams {
    pub k: usize,
}

impl Default for KnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for DtParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    /// `None` grows every tree until its leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrParams {
    pub lambda: f64,
    pub iterations: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcParams {
    pub lambda: f64,
}

impl Default for RcParams {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub alpha: f64,
}

impl Default for SgdParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 5,
            alpha: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DaParams {
    /// Diagonal ridge as a multiple of `trace(cov)/d`.
    pub shrinkage: f64,
}

impl Default for DaParams {
    fn default() -> Self {
        Self { shrinkage: 1e-6 }
    }
}

/// A classifier label with its frozen hyperparameters. Serialises as
/// `{"label": "RF", "n_trees": 100, ...}`; omitted fields take the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label")]
pub enum ModelSpec {
    NB(NbParams),
    KN(KnParams),
    DT(DtParams),
    RF(RfParams),
    LR(LrParams),
    RC(RcParams),
    SGD(SgdParams),
    LDA(DaParams),
    QDA(DaParams),
}

impl ModelSpec {
    pub const LABELS: [&'static str; 9] = ["NB", "KN", "DT", "RF", "LR", "RC", "SGD", "LDA", "QDA"];

    pub fn label(&self) -> &'static str {
        match self {
            ModelSpec::NB(_) => "NB",
            ModelSpec::KN(_) => "KN",
            ModelSpec::DT(_) => "DT",
            ModelSpec::RF(_) => "RF",
            ModelSpec::LR(_) => "LR",
            ModelSpec::RC(_) => "RC",
            ModelSpec::SGD(_) => "SGD",
            ModelSpec::LDA(_) => "LDA",
            ModelSpec::QDA(_) => "QDA",
        }
    }

    /// Default-hyperparameter spec for a label (case-insensitive).
    pub fn from_label(label: &str) -> Option<Self> {
        Some(match label.to_ascii_uppercase().as_str() {
            "NB" => ModelSpec::NB(NbParams::default()),
            "KN" | "KNN" => ModelSpec::KN(KnParams::default()),
            "DT" => ModelSpec::DT(DtParams::default()),
            "RF" => ModelSpec::RF(RfParams::default()),
            "LR" => ModelSpec::LR(LrParams::default()),
            "RC" => ModelSpec::RC(RcParams::default()),
            "SGD" => ModelSpec::SGD(SgdParams::default()),
            "LDA" => ModelSpec::LDA(DaParams::default()),
            "QDA" => ModelSpec::QDA(DaParams::default()),
            _ => return None,
        })
    }

    pub fn all_defaults() -> Vec<Self> {
        Self::LABELS
            .iter()
            .map(|l| Self::from_label(l).expect("known label"))
            .collect()
    }

    fn encoding(&self) -> (Encoding, bool) {
        match self {
            ModelSpec::DT(_) | ModelSpec::RF(_) | ModelSpec::KN(_) => (Encoding::Ordinal, false),
            ModelSpec::NB(_) => (Encoding::OneHot, false),
            _ => (Encoding::OneHot, true),
        }
    }

    // negated comparisons so that NaN fails every check
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |what: &str| Err(LearnError::InvalidHyperparameter(format!("{}: {what}", self.label())));
        match *self {
            ModelSpec::NB(p) if !(p.var_smoothing >= 0.0) => bad("var_smoothing must be >= 0"),
            ModelSpec::KN(p) if p.k == 0 => bad("k must be >= 1"),
            ModelSpec::DT(p) if p.max_depth == 0 || p.min_samples_leaf == 0 => {
                bad("max_depth and min_samples_leaf must be >= 1")
            }
            ModelSpec::RF(p) if p.n_trees == 0 || p.min_samples_leaf == 0 || p.max_depth == Some(0) => {
                bad("n_trees, max_depth and min_samples_leaf must be >= 1")
            }
            ModelSpec::LR(p) if !(p.lambda >= 0.0) || p.iterations == 0 => {
                bad("lambda must be >= 0 and iterations >= 1")
            }
            ModelSpec::RC(p) if !(p.lambda > 0.0) => bad("lambda must be > 0"),
            ModelSpec::SGD(p) if !(p.learning_rate > 0.0) || p.epochs == 0 || !(p.alpha >= 0.0) => {
                bad("learning_rate > 0, epochs >= 1, alpha >= 0 required")
            }
            ModelSpec::LDA(p) | ModelSpec::QDA(p) if !(p.shrinkage >= 0.0) => bad("shrinkage must be >= 0"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelSpec {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_label(s).ok_or_else(|| LearnError::InvalidHyperparameter(format!("unknown model label '{s}'")))
    }
}

#[derive(Debug, Clone)]
enum Learned {
    Nb(GaussianNb),
    Kn(Knn),
    Dt(DecisionTree),
    Rf(RandomForest),
    Linear(LinearModel),
    Lda(Lda),
    Qda(Qda),
}

impl Learned {
    fn predict(&self, row: &[f64]) -> usize {
        match self {
            Learned::Nb(m) => m.predict(row),
            Learned::Kn(m) => m.predict(row),
            Learned::Dt(m) => m.predict(row),
            Learned::Rf(m) => m.predict(row),
            Learned::Linear(m) => m.predict(row),
            Learned::Lda(m) => m.predict(row),
            Learned::Qda(m) => m.predict(row),
        }
    }
}

/// A trained classifier together with the preprocessing fitted on its
/// training rows.
#[derive(Debug, Clone)]
pub struct FittedModel {
    spec: ModelSpec,
    prep: Preprocessor,
    model: Learned,
    classes: Vec<String>,
}

impl FittedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Class labels, indexed like the predictions.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Naive Bayes posteriors; `None` for other models.
    pub fn nb_proba(&self, test: &Dataset) -> Result<Option<Vec<[f64; 2]>>, LearnError> {
        let Learned::Nb(nb) = &self.model else {
            return Ok(None);
        };
        let x = self.prep.transform(test)?;
        Ok(Some(x.iter_rows().map(|r| nb.predict_proba(r)).collect()))
    }
}

pub fn fit(spec: &ModelSpec, train: &Dataset, seed: u64) -> Result<FittedModel, LearnError> {
    spec.validate()?;
    let y = train.labels();
    if !y.contains(&0) || !y.contains(&1) {
        return Err(LearnError::DegenerateTraining);
    }
    let (encoding, standardize) = spec.encoding();
    let prep = Preprocessor::fit(train, encoding, standardize);
    let x = prep.transform(train)?;
    let model = match *spec {
        ModelSpec::NB(p) => Learned::Nb(GaussianNb::fit(&x, &y, p.var_smoothing)),
        ModelSpec::KN(p) => Learned::Kn(Knn::fit(&x, &y, p.k)),
        ModelSpec::DT(p) => {
            let params = TreeParams {
                max_depth: Some(p.max_depth),
                min_samples_leaf: p.min_samples_leaf,
                max_features: None,
            };
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let (tree, _) = DecisionTree::fit(&x, &y, (0..x.rows()).collect(), &params, &mut rng);
            Learned::Dt(tree)
        }
        ModelSpec::RF(p) => {
            let (forest, _) =
                RandomForest::fit(&x, &y, p.n_trees, p.max_depth, p.min_samples_leaf, p.bootstrap, seed);
            Learned::Rf(forest)
        }
        ModelSpec::LR(p) => Learned::Linear(fit_logistic(&x, &y, p.lambda, p.iterations, seed).0),
        ModelSpec::RC(p) => Learned::Linear(fit_ridge(&x, &y, p.lambda)?),
        ModelSpec::SGD(p) => Learned::Linear(fit_sgd(&x, &y, p.learning_rate, p.epochs, p.alpha, seed)),
        ModelSpec::LDA(p) => Learned::Lda(Lda::fit(&x, &y, p.shrinkage)?),
        ModelSpec::QDA(p) => Learned::Qda(Qda::fit(&x, &y, p.shrinkage)?),
    };
    Ok(FittedModel {
        spec: *spec,
        prep,
        model,
        classes: train.class_labels().to_vec(),
    })
}

/// Predicted class index (into [`FittedModel::classes`]) for every test row.
pub fn predict(m: &FittedModel, test: &Dataset) -> Result<Vec<usize>, LearnError> {
    if test.n_rows() == 0 {
        return Ok(Vec::new());
    }
    let x = m.prep.transform(test)?;
    Ok(x.iter_rows().map(|r| m.model.predict(r)).collect())
}

/// Scores the model on `test`. Test labels are matched to training classes by
/// their text, so the two tables may order their categories differently.
pub fn performance(m: &FittedModel, test: &Dataset, metric: &PerfMetric) -> Result<f64, LearnError> {
    if test.n_rows() == 0 {
        return Err(LearnError::EmptyTest);
    }
    let test_labels = test.class_labels();
    let mut relabel = Vec::with_capacity(test_labels.len());
    for l in test_labels {
        let idx = m.classes.iter().position(|c| c == l).ok_or_else(|| {
            LearnError::SchemaMismatch(format!("test class '{l}' was not seen in training"))
        })?;
        relabel.push(idx);
    }
    let truth: Vec<usize> = test.labels().into_iter().map(|c| relabel[c]).collect();
    let predicted = predict(m, test)?;
    let positive = metric.positive_index(&m.classes)?;
    metric.score(&predicted, &truth, positive)
}

/// Random-forest impurity importances per feature column, in schema order.
/// Scores are non-negative and sum to one; a forest that never splits
/// spreads the mass uniformly.
pub fn feature_importance(d: &Dataset, seed: u64) -> Result<Vec<(String, f64)>, LearnError> {
    let y = d.labels();
    if !y.contains(&0) || !y.contains(&1) {
        return Err(LearnError::DegenerateTraining);
    }
    let p = RfParams::default();
    let prep = Preprocessor::fit(d, Encoding::Ordinal, false);
    let x = prep.transform(d)?;
    let (_, mut scores) = RandomForest::fit(&x, &y, p.n_trees, p.max_depth, p.min_samples_leaf, p.bootstrap, seed);
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        let k = scores.len().max(1) as f64;
        scores.iter_mut().for_each(|s| *s = 1.0 / k);
    }
    Ok(prep
        .feature_names()
        .into_iter()
        .map(String::from)
        .zip(scores)
        .collect())
}
