//! Command-line front end. Every subcommand reads one JSON experiment
//! configuration; exit status is 0 on success, 1 on a runtime error and 2
//! on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval::{answer_stats, dataset_stats, format_answer_stats, format_dataset_stats, metrics_tsv, SystemMetrics};
use crate::harness::artifacts::{
    build_classifier, build_identifiers, build_index, build_weak_labels, ensure_identifiers, ensure_index,
    ensure_scorer, ensure_split, ensure_weak_labels, make_split, save_identifiers, save_index, save_scorer, save_split,
    save_weak_labels, train_scorer, write_file,
};
use crate::harness::{
    compare_runs, evaluate_run, retrieve, run_experiment, significance_tsv, ExperimentConfig, Inputs, RunReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "clarifyir",
    version,
    about = "Offline multimodal query clarification experiments"
)]
struct Cli {
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Build any missing upstream artifact instead of failing.
    #[arg(long)]
    prepare: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Baseline report; defaults to the configuration's `baseline_report`.
    #[arg(long, value_name = "PATH")]
    baseline: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assign facets to train/validation/test and write the split file.
    Split(ConfigArg),
    /// Build the inverted index.
    Index(ConfigArg),
    /// Build the document identifier table.
    Identifiers(ConfigArg),
    /// Train the reference sequence scorer on train-facet targets.
    TrainScorer(ConfigArg),
    /// Compute VEQ/TEQ weak labels for clarifying questions.
    WeakLabel(ConfigArg),
    /// Train the question classifier on weak labels.
    TrainClassifier(ConfigArg),
    /// Rank every evaluated sample and write the run file.
    Retrieve(PrepareArgs),
    /// Score the run file and write the report.
    Evaluate(ConfigArg),
    /// Print dataset and answer statistics.
    Stats(ConfigArg),
    /// Paired significance tests of this configuration's report against a baseline report.
    Compare(CompareArgs),
    /// Retrieve and evaluate in one step.
    Run(PrepareArgs),
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();

    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            1
        }
    }
}

fn load(arg: &ConfigArg) -> Result<(ExperimentConfig, Inputs)> {
    let cfg = ExperimentConfig::load(&arg.config)?;
    let inputs = Inputs::load(&cfg)?;
    Ok((cfg, inputs))
}

fn print(text: &str) -> Result<()> {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn report_row(report: &RunReport) -> String {
    let row = SystemMetrics {
        system: report.body.system.clone(),
        metrics: report.body.evaluation.macro_metrics,
    };
    metrics_tsv(&[row])
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Split(arg) => {
            let (cfg, inputs) = load(&arg)?;
            let split = make_split(&cfg, &inputs)?;
            save_split(&cfg, &split)?;
            log::info!("wrote {}", cfg.split_path().display());
        }
        Command::Index(arg) => {
            let (cfg, inputs) = load(&arg)?;
            save_index(&cfg, &build_index(&inputs)?)?;
            log::info!("wrote {}", cfg.index_path().display());
        }
        Command::Identifiers(arg) => {
            let (cfg, inputs) = load(&arg)?;
            let index = ensure_index(&cfg, &inputs, false)?;
            save_identifiers(&cfg, &build_identifiers(&cfg, &inputs, &index)?)?;
            log::info!("wrote {}", cfg.identifiers_path().display());
        }
        Command::TrainScorer(arg) => {
            let (cfg, inputs) = load(&arg)?;
            let index = ensure_index(&cfg, &inputs, false)?;
            let ids = ensure_identifiers(&cfg, &inputs, &index, false)?;
            let split = ensure_split(&cfg, &inputs, false)?;
            save_scorer(&cfg, &train_scorer(&cfg, &inputs, &index, &ids, &split)?)?;
            log::info!("wrote {}", cfg.scorer_path().display());
        }
        Command::WeakLabel(arg) => {
            let (cfg, inputs) = load(&arg)?;
            let index = ensure_index(&cfg, &inputs, false)?;
            let ids = ensure_identifiers(&cfg, &inputs, &index, false)?;
            let scorer = ensure_scorer(&cfg, &inputs, &index, &ids, false)?;
            let records = build_weak_labels(&cfg, &inputs, &index, ids, scorer)?;
            save_weak_labels(&cfg, &records)?;
            log::info!("wrote {} labels to {}", records.len(), cfg.weak_labels_path().display());
        }
        Command::TrainClassifier(arg) => {
            let (cfg, inputs) = load(&arg)?;
            let index = ensure_index(&cfg, &inputs, false)?;
            let ids = ensure_identifiers(&cfg, &inputs, &index, false)?;
            let scorer = ensure_scorer(&cfg, &inputs, &index, &ids, false)?;
            let labels = ensure_weak_labels(&cfg, &inputs, &index, &ids, &scorer, false)?;
            let split = ensure_split(&cfg, &inputs, false)?;
            let path = cfg.classifier_path();
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            build_classifier(&cfg, &inputs, &labels, &split)?.save(&path)?;
            log::info!("wrote {}", path.display());
        }
        Command::Retrieve(args) => {
            let (cfg, inputs) = load(&args.config)?;
            let runs = retrieve(&cfg, &inputs, args.prepare)?;
            log::info!("wrote {} rankings to {}", runs.len(), cfg.run_path().display());
        }
        Command::Evaluate(arg) => {
            let (cfg, inputs) = load(&arg)?;
            print(&report_row(&evaluate_run(&cfg, &inputs)?))?;
        }
        Command::Stats(arg) => {
            let (_, inputs) = load(&arg)?;
            let ds = &inputs.dataset;
            print(&format_dataset_stats(&dataset_stats(ds)))?;
            print("\n")?;
            print(&format_answer_stats(&answer_stats(&ds.answers)?))?;
        }
        Command::Compare(args) => {
            let cfg = ExperimentConfig::load(&args.config.config)?;
            let baseline: PathBuf = match (&args.baseline, &cfg.baseline_report) {
                (Some(p), _) => p.clone(),
                (None, Some(p)) => cfg.resolve(p),
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "no baseline report: pass --baseline or set `baseline_report`".into(),
                    ))
                }
            };
            let ours = RunReport::load(cfg.report_path())?;
            let theirs = RunReport::load(&baseline)?;
            let table = significance_tsv(&compare_runs(&ours.body, &theirs.body)?);
            write_file(&cfg.output_dir().join(comparison_file(&theirs.body.system)), &table)?;
            print(&table)?;
        }
        Command::Run(args) => {
            let cfg = ExperimentConfig::load(&args.config.config)?;
            print(&report_row(&run_experiment(&cfg, args.prepare)?))?;
        }
    }
    Ok(())
}

fn comparison_file(baseline: &str) -> PathBuf {
    let safe: String = baseline
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    Path::new(&format!("significance_vs_{safe}.tsv")).to_path_buf()
}
