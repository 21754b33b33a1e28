//! The `chrono-embed` command line: ingest a corpus, train per-bin models
//! and report drift, bias and frequency series.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use chrono_embed::corpus::{DEFAULT_MIN_OCR, DEFAULT_TARGET_TOKENS};
use chrono_embed::drift::DriftMode;
use chrono_embed::sgns::{TrainConfig, DEFAULT_DIM, DEFAULT_WINDOW};
use chrono_embed::store::DEFAULT_K;
use chrono_embed::text::DEFAULT_MIN_COUNT;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use manifest::{sha256_file, InputHash, RunManifest, TOOL};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHRONO_EMBED_THREADS";

#[derive(Debug, Parser, Serialize)]
#[command(name = "chrono-embed", version, about = "Diachronic word embeddings over token-balanced time bins")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Filter a JSON Lines corpus and plan token-balanced bins.
    Ingest(IngestArgs),
    /// Train one embedding model per bin into an archive.
    Train(TrainArgs),
    /// Neighborhood change of words across bins.
    Drift(DriftArgs),
    /// Mean bias of words along antonym-pair streams.
    Bias(BiasArgs),
    /// Relative frequency of words per bin.
    Freq(FreqArgs),
    /// Replay the command recorded in a run manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Train(_) => "train",
            Command::Drift(_) => "drift",
            Command::Bias(_) => "bias",
            Command::Freq(_) => "freq",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    /// Documents, one JSON object per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Keyword file, one keyword per line; the built-in list when omitted.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_OCR)]
    pub min_ocr: f64,
    #[arg(long, default_value_t = DEFAULT_TARGET_TOKENS)]
    pub target_tokens: u64,
    /// Output directory for the bin plan, report and per-bin corpora.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    pub bins: PathBuf,
    /// Archive directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    #[arg(long, default_value_t = TrainConfig::default().negatives)]
    pub negatives: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().initial_lr)]
    pub lr: f64,
    /// Subsampling threshold; 0 disables subsampling.
    #[arg(long, default_value_t = TrainConfig::default().subsample_threshold)]
    pub sample: f64,
    /// Use the full window at every position.
    #[arg(long)]
    pub fixed_window: bool,
    /// One worker per bin, so that equal seeds give identical archives.
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    pub seed: u64,
    /// Also store the context vectors.
    #[arg(long)]
    pub keep_context: bool,
}

impl TrainArgs {
    pub fn config(&self, workers: usize) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            min_count: self.min_count,
            negatives: self.negatives,
            epochs: self.epochs,
            initial_lr: self.lr,
            subsample_threshold: self.sample,
            seed: self.seed,
            workers,
            dynamic_window: !self.fixed_window,
            ..TrainConfig::default()
        }
    }
}

fn parse_diff(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B bin indices, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("{x:?} is not a bin index"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DriftArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Target word; repeat for several.
    #[arg(long, required = true)]
    pub word: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value = "vs_first")]
    pub mode: DriftMode,
    /// Also list neighbors gained and lost between bins A and B.
    #[arg(long, value_name = "A:B", value_parser = parse_diff)]
    pub diff: Option<(u32, u32)>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BiasArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Stream configuration; the six built-in streams when omitted.
    #[arg(long)]
    pub streams: Option<PathBuf>,
    /// Comma-separated target words.
    #[arg(long, required = true, value_delimiter = ',')]
    pub words: Vec<String>,
    /// Report the sum over all streams instead of each stream.
    #[arg(long)]
    pub cumulative: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FreqArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Comma-separated words.
    #[arg(long, required = true, value_delimiter = ',')]
    pub words: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] chrono_embed::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(chrono_embed::Error::Config(_)) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        if self.exit_code() == 1 {
            "usage"
        } else {
            "data"
        }
    }

    /// One-line JSON form printed on stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

/// Runs `argv` (without the program name) as already parsed `cli`.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    commands::execute(cli, argv)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    let n = n.min(std::thread::available_parallelism().map_or(n, |p| p.get()).max(1));
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::debug!("thread pool already configured: {e}");
    }
    Ok(())
}

/// Full command-line entry: parses, runs and reports. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = e.print();
            let err = CliError::usage(e.kind().to_string());
            let _ = writeln!(std::io::stderr(), "{}", err.to_json_line());
            return err.exit_code();
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = init_threads().and_then(|()| execute(&cli, &argv));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}", e.to_json_line());
            e.exit_code()
        }
    }
}
