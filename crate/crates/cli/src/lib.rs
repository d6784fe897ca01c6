//! `wsd`: experiment runner for the wsd-core workbench.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod cmd;
pub mod config;
mod files;

pub use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Bad flags, unreadable configuration or an invalid grid.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "wsd", version, about = "Supervised word sense disambiguation workbench")]
pub struct Cli {
    /// Log level filter (error, warn, info, debug, trace); RUST_LOG overrides it.
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic pseudo-word dataset.
    GenData(GenDataArgs),
    /// Train CBOW embeddings on a corpus.
    EmbedTrain(EmbedTrainArgs),
    /// Write the feature vectors of every instance.
    ExtractFeatures(ExtractArgs),
    /// Run a feature x learner grid from a TOML experiment file.
    Run(RunArgs),
    /// Paired randomization test between two saved reports.
    Compare(CompareArgs),
    /// Markdown summary table of saved reports.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Output dataset (JSONL); `dataset.json` is written beside it.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with generator settings; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub senses: Option<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Also write unlabelled background citations for embedding training.
    #[arg(long)]
    pub background: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedTrainArgs {
    /// Corpus: `.jsonl` citation records, otherwise plain text with one document per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Binary model output; metadata goes to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the `word v1 v2 ...` text format.
    #[arg(long)]
    pub text_out: Option<PathBuf>,
    /// TOML file with CBOW settings; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// File of citation ids (one per line) to leave out of training.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Leave out every citation of this dataset (e.g. the evaluation set).
    #[arg(long)]
    pub exclude_dataset: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training threads; 1 is deterministic.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Feature families joined by `+`, e.g. `unigrams+we-avg`.
    #[arg(long)]
    pub features: String,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Tab-separated `word tag` lines added to the built-in tagger.
    #[arg(long)]
    pub pos_lexicon: Option<PathBuf>,
    /// Indicator instead of count values for unigrams and bigrams.
    #[arg(long)]
    pub binary: bool,
    /// Keep the target word in the bag features.
    #[arg(long)]
    pub include_target: bool,
    /// Treat missing concept/semantic-type layers as empty.
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment TOML file.
    pub config: PathBuf,
    /// Override the output directory of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parallel workers for grid cells and terms.
    #[arg(long, env = "WSD_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    /// Pair per-instance outcomes instead of per-term accuracies.
    #[arg(long)]
    pub per_instance: bool,
    #[arg(long, default_value_t = 100_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for diff.csv and diff.svg.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Map an error to its exit code by the first classified cause in its chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<wsd_core::Error>() {
            return if e.is_numeric() { EXIT_NUMERIC } else { EXIT_DATA };
        }
    }
    EXIT_DATA
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenData(a) => cmd::gen_data::run(&a),
        Command::EmbedTrain(a) => cmd::embed::run(&a),
        Command::ExtractFeatures(a) => cmd::features::run(&a),
        Command::Run(a) => cmd::experiment::run(&a),
        Command::Compare(a) => cmd::compare::run(&a),
        Command::Report(a) => cmd::report::run(&a),
    }
}

/// Parse arguments, execute and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
