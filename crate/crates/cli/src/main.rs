//! `esprofile`: configure, run, analyze and report error sensitivity
//! profiling experiments.

mod configure;

use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use esprofile_core::analysis::{analyze, Analysis};
use esprofile_core::esp::{aggregate, import_curves};
use esprofile_core::report::CanonicalReport;
use esprofile_core::runner::{run_experiment, RunOptions, RunStore};
use esprofile_core::{CorruptError, DataError, EspError, EspProfile, ExperimentConfig, LearnError, RunError};

use configure::{build_config, wizard, Answers, ConfigureArgs};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "esprofile", version, about = "Error sensitivity profiling for tabular classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an experiment config, interactively or from flags.
    Configure(Box<ConfigureArgs>),
    /// Execute an experiment into its run store.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (0: all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        resume: bool,
        /// Run store directory (overrides the config).
        #[arg(long, env = "ESPROFILE_OUT")]
        out: Option<PathBuf>,
    },
    /// Aggregate profiles and apply the significance and relevance filter.
    Analyze {
        #[arg(long)]
        store: PathBuf,
        /// FDR level (default: the config's alpha).
        #[arg(long)]
        alpha: Option<f64>,
        /// Relevance thresholds (default: the config's deltas).
        #[arg(long, num_args = 1..)]
        delta: Vec<f64>,
        /// Output directory (default: the store).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the canonical report of one scenario.
    Report {
        #[arg(long)]
        analysis: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
        /// Threshold whose verdict is attached (default: the first).
        #[arg(long)]
        delta: Option<f64>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate curves from an interchange file.
    Profile {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &RunError) -> u8 {
    let validation = match e {
        RunError::Validation { .. } => true,
        RunError::Data(d) => !matches!(d, DataError::Io(_)),
        RunError::Corrupt(c) => !matches!(c, CorruptError::Data(DataError::Io(_))),
        RunError::Esp(EspError::SchemaViolation(_)) => true,
        RunError::Learn(LearnError::InvalidHyperparameter(_) | LearnError::UnknownPositiveClass(_)) => true,
        _ => false,
    };
    if validation {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

fn error_kind(e: &RunError) -> &'static str {
    match e {
        RunError::Validation { .. } => "validation",
        RunError::ScenarioNotFound(_) => "scenario_not_found",
        RunError::IncompleteRepetition(_) => "incomplete_repetition",
        RunError::Integrity { .. } => "integrity",
        RunError::ConfigMismatch(_) => "config_mismatch",
        RunError::StoreExists(_) => "store_exists",
        RunError::EmptyStore => "empty_store",
        RunError::CorruptStore { .. } => "corrupt_store",
        RunError::Data(_) => "data",
        RunError::Corrupt(_) => "corruption",
        RunError::Learn(_) => "learning",
        RunError::Esp(_) => "esp",
        RunError::Stats(_) => "stats",
        RunError::Json(_) => "json",
        RunError::Io(_) => "io",
    }
}

fn error_json(e: &RunError) -> String {
    let field = match e {
        RunError::Validation { field, .. } => Some(field.as_str()),
        _ => None,
    };
    let message = match e {
        RunError::Validation { message, .. } => message.clone(),
        other => other.to_string(),
    };
    serde_json::json!({ "error": error_kind(e), "message": message, "field": field }).to_string()
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Configure(args) => {
            let defaults = Answers::from_args(&args);
            let answers = if args.non_interactive {
                defaults
            } else {
                let stdin = io::stdin();
                let mut input = stdin.lock();
                // prompts go to stderr so stdout stays clean when piped
                let mut prompts = io::stderr().lock();
                let a = wizard(&defaults, &mut input, &mut prompts)?;
                if !io::stdin().is_terminal() {
                    writeln!(prompts)?;
                }
                a
            };
            let config = build_config(&answers)?;
            std::fs::write(&args.out, config.to_json())?;
            eprintln!("wrote {}", args.out.display());
            Ok(())
        }
        Command::Run {
            config,
            workers,
            resume,
            out,
        } => {
            if !config.exists() {
                return Err(RunError::validation(
                    "--config",
                    format!("config file {} does not exist", config.display()),
                ));
            }
            let config = ExperimentConfig::load(&config)?;
            let summary = run_experiment(&config, &RunOptions { workers, resume, out })?;
            for s in &summary.skipped_specs {
                eprintln!("skipped {}: {}", s.spec, s.reason);
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Analyze {
            store,
            alpha,
            delta,
            out,
        } => {
            let store = RunStore::open(&store)?;
            let alpha = alpha.unwrap_or(store.config().alpha);
            let deltas = if delta.is_empty() {
                store.config().deltas.clone()
            } else {
                delta
            };
            let analysis = analyze(&store, alpha, &deltas)?;
            let dir = out.unwrap_or_else(|| store.dir().to_path_buf());
            std::fs::create_dir_all(&dir)?;
            write_analysis(&analysis, &dir)?;
            print!("{}", analysis.render_summary());
            Ok(())
        }
        Command::Report {
            analysis,
            scenario,
            format,
            delta,
            out,
        } => {
            let text = std::fs::read_to_string(&analysis)?;
            let analysis: Analysis = serde_json::from_str(&text)?;
            let report = CanonicalReport::from_analysis(&analysis, &scenario, delta)?;
            let rendered = match format {
                Format::Svg => report.to_svg(),
                Format::Json => report.to_json(),
            };
            write_output(out.as_deref(), &rendered)
        }
        Command::Profile { curves, out } => {
            let curves = import_curves(&curves)?;
            let profiles = curves
                .into_iter()
                .map(EspProfile::compute)
                .collect::<Result<Vec<_>, _>>()?;
            let agg = aggregate(&profiles)?;
            let mut text = serde_json::to_string_pretty(&agg)?;
            text.push('\n');
            write_output(out.as_deref(), &text)
        }
    }
}

/// `analysis.json` plus one significance report (JSON and CSV) per threshold.
fn write_analysis(analysis: &Analysis, dir: &Path) -> Result<(), RunError> {
    std::fs::write(dir.join("analysis.json"), analysis.to_json())?;
    for r in &analysis.results {
        let stem = format!("significance_delta_{}", r.delta);
        std::fs::write(dir.join(format!("{stem}.json")), r.significance.to_json())?;
        let file = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        r.significance
            .write_csv(BufWriter::new(file))
            .map_err(|e| RunError::Io(io::Error::other(e.to_string())))?;
    }
    Ok(())
}
