//! `configure`: build an experiment config from prompts or flags. Both paths
//! fill the same [`Answers`], so equal answers give byte-identical files.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use esprofile_core::corrupt::ErrorType;
use esprofile_core::runner::{CustomSpec, DatasetRef, Strategy};
use esprofile_core::tabular::csv_header;
use esprofile_core::{ExperimentConfig, ModelSpec, PerfMetric, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyChoice {
    OneFeature,
    Correlated,
    Custom,
}

impl StrategyChoice {
    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s.trim(), true).ok()
    }
}

pub const DEFAULT_ERROR_TYPES: &str = "noisy_values,missing_values";
pub const DEFAULT_SCHEDULE: &str = "0,20,40,60,80";
pub const DEFAULT_MODELS: &str = "NB,KN,DT,RF,LR,RC,SGD,LDA,QDA";

#[derive(Debug, Clone, Args)]
pub struct ConfigureArgs {
    /// Take every answer from flags instead of prompting.
    #[arg(long)]
    pub non_interactive: bool,
    /// Where to write the config file.
    #[arg(long, default_value = "esp-config.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Target column (defaults to the last column).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum, default_value = "one-feature")]
    pub strategy: StrategyChoice,
    /// Comma-separated cell error types.
    #[arg(long, default_value = DEFAULT_ERROR_TYPES)]
    pub error_types: String,
    /// Comma-separated features for one-feature (empty: all).
    #[arg(long, default_value = "")]
    pub features: String,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// JSON array of custom specs (custom strategy).
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_MODELS)]
    pub models: String,
    #[arg(long, default_value = DEFAULT_SCHEDULE)]
    pub schedule: String,
    #[arg(long, default_value_t = 30)]
    pub repetitions: u32,
    /// f1 or accuracy.
    #[arg(long, default_value = "f1")]
    pub metric: String,
    #[arg(long)]
    pub positive_class: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Comma-separated relevance thresholds.
    #[arg(long, default_value = "0.05")]
    pub deltas: String,
    #[arg(long, default_value_t = 0.8)]
    pub split_ratio: f64,
    #[arg(long, default_value = "esp-runs")]
    pub output_dir: PathBuf,
}

/// Every answer the wizard asks for, as text.
#[derive(Debug, Clone)]
pub struct Answers {
    pub dataset: String,
    pub target: String,
    pub strategy: String,
    pub error_types: String,
    pub features: String,
    pub threshold: String,
    pub spec_file: String,
    pub models: String,
    pub schedule: String,
    pub repetitions: String,
    pub metric: String,
    pub positive_class: String,
    pub seed: String,
    pub alpha: String,
    pub deltas: String,
    pub split_ratio: String,
    pub output_dir: String,
}

impl Answers {
    pub fn from_args(a: &ConfigureArgs) -> Self {
        Self {
            dataset: a.dataset.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            target: a.target.clone().unwrap_or_default(),
            strategy: a.strategy.to_possible_value().expect("named").get_name().to_string(),
            error_types: a.error_types.clone(),
            features: a.features.clone(),
            threshold: a.threshold.to_string(),
            spec_file: a.spec_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            models: a.models.clone(),
            schedule: a.schedule.clone(),
            repetitions: a.repetitions.to_string(),
            metric: a.metric.clone(),
            positive_class: a.positive_class.clone().unwrap_or_default(),
            seed: a.seed.to_string(),
            alpha: a.alpha.to_string(),
            deltas: a.deltas.clone(),
            split_ratio: a.split_ratio.to_string(),
            output_dir: a.output_dir.display().to_string(),
        }
    }
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn number<T: std::str::FromStr>(field: &str, s: &str) -> Result<T, RunError> {
    s.trim()
        .parse()
        .map_err(|_| RunError::validation(field, format!("'{s}' is not a valid number")))
}

pub fn parse_error_type(s: &str) -> Option<ErrorType> {
    Some(match s {
        "noisy_values" | "noise" => ErrorType::noisy(),
        "outliers" => ErrorType::outliers(),
        "missing_values" | "missing" => ErrorType::MissingValues,
        _ => return None,
    })
}

fn default_target(dataset: &str) -> Result<String, RunError> {
    csv_header(dataset)?
        .pop()
        .ok_or_else(|| RunError::validation("dataset.target", "the dataset has no columns"))
}

/// Turns answers into a validated config. Validation errors name the field.
pub fn build_config(a: &Answers) -> Result<ExperimentConfig, RunError> {
    if a.dataset.trim().is_empty() {
        return Err(RunError::validation("dataset.path", "a dataset path is required"));
    }
    let target = if a.target.trim().is_empty() {
        default_target(a.dataset.trim())?
    } else {
        a.target.trim().to_string()
    };
    let error_types = list(&a.error_types)
        .iter()
        .enumerate()
        .map(|(j, name)| {
            parse_error_type(name).ok_or_else(|| {
                RunError::validation(
                    format!("strategies[0].error_types[{j}]"),
                    format!("'{name}' is not a cell error type (noisy_values, outliers, missing_values)"),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let strategy = match StrategyChoice::parse(&a.strategy) {
        Some(StrategyChoice::OneFeature) => Strategy::OneFeatureAtATime {
            error_types,
            features: list(&a.features),
        },
        Some(StrategyChoice::Correlated) => Strategy::CorrelatedFeatures {
            error_types,
            threshold: number("strategies[0].threshold", &a.threshold)?,
        },
        Some(StrategyChoice::Custom) => {
            let path = a.spec_file.trim();
            if path.is_empty() {
                return Err(RunError::validation("strategies[0].specs", "custom strategy needs a spec file"));
            }
            let text = std::fs::read_to_string(path)?;
            let specs: Vec<CustomSpec> = serde_json::from_str(&text)
                .map_err(|e| RunError::validation("strategies[0].specs", e.to_string()))?;
            Strategy::Custom { specs }
        }
        None => {
            return Err(RunError::validation(
                "strategies[0].strategy",
                format!("'{}' is not one of one-feature, correlated, custom", a.strategy),
            ))
        }
    };
    let models = list(&a.models)
        .iter()
        .enumerate()
        .map(|(i, m)| {
            m.parse::<ModelSpec>()
                .map_err(|e| RunError::validation(format!("models[{i}]"), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let schedule = list(&a.schedule)
        .iter()
        .map(|v| number::<f64>("schedule", v))
        .collect::<Result<Vec<_>, _>>()?;
    let positive_class = Some(a.positive_class.trim().to_string()).filter(|s| !s.is_empty());
    let metric = match a.metric.trim() {
        "f1" => PerfMetric::F1 { positive_class },
        "accuracy" if positive_class.is_none() => PerfMetric::Accuracy,
        "accuracy" => return Err(RunError::validation("metric", "positive class only applies to f1")),
        other => return Err(RunError::validation("metric", format!("'{other}' is not f1 or accuracy"))),
    };
    let deltas = list(&a.deltas)
        .iter()
        .enumerate()
        .map(|(i, d)| number::<f64>(&format!("deltas[{i}]"), d))
        .collect::<Result<Vec<_>, _>>()?;

    let mut config = ExperimentConfig::new(
        DatasetRef {
            path: PathBuf::from(a.dataset.trim()),
            target,
            schema_hints: Default::default(),
        },
        vec![strategy],
        models,
        number("master_seed", &a.seed)?,
    );
    config.schedule = schedule;
    config.repetitions = number("repetitions", &a.repetitions)?;
    config.metric = metric;
    config.alpha = number("alpha", &a.alpha)?;
    config.deltas = deltas;
    config.split_ratio = number("split_ratio", &a.split_ratio)?;
    config.output_dir = PathBuf::from(a.output_dir.trim());
    config.validate()?;
    Ok(config)
}

struct Prompter<'a, R, W> {
    input: &'a mut R,
    output: &'a mut W,
}

impl<R: BufRead, W: Write> Prompter<'_, R, W> {
    /// Shows `question [default]`; an empty line keeps the default.
    fn ask(&mut self, question: &str, default: &str) -> Result<String, RunError> {
        if default.is_empty() {
            write!(self.output, "{question}: ")?;
        } else {
            write!(self.output, "{question} [{default}]: ")?;
        }
        self.output.flush()?;
        let mut line = String::new();
        self.input.read_line(&mut line)?;
        let line = line.trim();
        Ok(if line.is_empty() { default.to_string() } else { line.to_string() })
    }
}

/// Interactive wizard. Flag values act as the defaults shown in prompts.
pub fn wizard<R: BufRead, W: Write>(defaults: &Answers, input: &mut R, output: &mut W) -> Result<Answers, RunError> {
    let mut p = Prompter { input, output };
    let mut a = defaults.clone();
    a.dataset = p.ask("Dataset CSV path", &defaults.dataset)?;
    let target_default = if defaults.target.is_empty() && !a.dataset.is_empty() {
        default_target(&a.dataset).unwrap_or_default()
    } else {
        defaults.target.clone()
    };
    a.target = p.ask("Target column", &target_default)?;
    a.strategy = p.ask("Strategy (one-feature, correlated, custom)", &defaults.strategy)?;
    match StrategyChoice::parse(&a.strategy) {
        Some(StrategyChoice::OneFeature) => {
            a.error_types = p.ask("Error types", &defaults.error_types)?;
            a.features = p.ask("Features (comma-separated, empty for all)", &defaults.features)?;
        }
        Some(StrategyChoice::Correlated) => {
            a.error_types = p.ask("Error types", &defaults.error_types)?;
            a.threshold = p.ask("Correlation threshold", &defaults.threshold)?;
        }
        Some(StrategyChoice::Custom) => {
            a.spec_file = p.ask("Custom spec file", &defaults.spec_file)?;
        }
        None => {}
    }
    a.models = p.ask("Models", &defaults.models)?;
    a.schedule = p.ask("Severity schedule (%)", &defaults.schedule)?;
    a.repetitions = p.ask("Repetitions", &defaults.repetitions)?;
    a.metric = p.ask("Metric (f1, accuracy)", &defaults.metric)?;
    if a.metric.trim() == "f1" {
        a.positive_class = p.ask("Positive class (empty for the second label)", &defaults.positive_class)?;
    }
    a.seed = p.ask("Master seed", &defaults.seed)?;
    a.alpha = p.ask("FDR level alpha", &defaults.alpha)?;
    a.deltas = p.ask("Relevance thresholds delta", &defaults.deltas)?;
    a.split_ratio = p.ask("Train fraction", &defaults.split_ratio)?;
    a.output_dir = p.ask("Run store directory", &defaults.output_dir)?;
    Ok(a)
}
