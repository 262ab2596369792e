//! `egd`: compress tabular and image datasets, inspect containers, and train
//! on condensed samples.

mod bench;
mod error;
mod images;
mod tabular;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use egd_core::gede::CondensedMode;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "egd", version, about = "Entropy-guided deduplication and training on condensed samples")]
struct Cli {
    /// Emit structured JSON instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress a typed CSV into an EGD1 container.
    Compress(CompressArgs),
    /// Restore the original CSV from a container.
    Decompress(DecompressArgs),
    /// Print container header counters and sizes.
    Stats(StatsArgs),
    /// Per-column bit entropy of a CSV or container.
    Entropy(EntropyArgs),
    /// Train a linear or logistic model on full or condensed data.
    Train(TrainArgs),
    /// Decode a seeded random subset of an image archive.
    Sample(SampleArgs),
    /// Image archive commands.
    #[command(subcommand)]
    Images(ImagesCommand),
    /// Time full versus condensed training paths on synthetic data.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub beta: usize,
    #[arg(long, default_value_t = 8)]
    pub tau: usize,
    #[arg(long, value_enum, default_value_t = Condensed::Stored)]
    pub condensed: Condensed,
    /// Target column name; excluded from the cluster key.
    #[arg(long)]
    pub target: Option<String>,
    /// Schema sidecar overriding inference.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output container (defaults to the input with an `.egd` extension).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Condensed {
    Stored,
    OnDemand,
    None,
}

impl From<Condensed> for CondensedMode {
    fn from(c: Condensed) -> Self {
        match c {
            Condensed::Stored => CondensedMode::Stored,
            Condensed::OnDemand => CondensedMode::OnDemand,
            Condensed::None => CondensedMode::None,
        }
    }
}

#[derive(Args, Debug)]
pub struct DecompressArgs {
    pub input: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    /// CSV file or EGD1 container.
    pub input: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Also print one line per bit position.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// CSV file or EGD1 container.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::Linreg)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    pub mode: Mode,
    /// Target column name (defaults to the container's target).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Held-out data: a CSV/container path, or a fraction in (0, 1) split
    /// from the input (full mode only).
    #[arg(long)]
    pub test: Option<String>,
    /// Standardize features with training-set statistics.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub no_intercept: bool,
    #[arg(long, default_value_t = 100)]
    pub loss_every: usize,
    /// Seeds the split shuffle and a random θ start.
    #[arg(long, env = "EGD_SEED")]
    pub seed: Option<u64>,
    /// Also write the full report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Linreg,
    Logreg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Full,
    Condensed,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    pub archive: PathBuf,
    #[arg(long)]
    pub fraction: f64,
    #[arg(long, env = "EGD_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub epoch: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ImagesCommand {
    /// Build a class-wise archive from IDX files or a PNM directory.
    Compress(ImagesCompressArgs),
}

#[derive(Args, Debug)]
pub struct ImagesCompressArgs {
    /// IDX image file (optionally gzipped).
    #[arg(long, requires = "idx_labels", conflicts_with = "pnm_dir")]
    pub idx_images: Option<PathBuf>,
    #[arg(long)]
    pub idx_labels: Option<PathBuf>,
    /// Directory of `<label>/*.ppm|pgm`.
    #[arg(long)]
    pub pnm_dir: Option<PathBuf>,
    /// Keep at most this many images per class.
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Store DCT coefficients (after YCbCr for colour input).
    #[arg(long)]
    pub dct: bool,
    #[arg(long, default_value_t = 1)]
    pub frac_bits: u8,
    #[arg(long, default_value_t = 0)]
    pub beta: usize,
    #[arg(long, default_value_t = 16)]
    pub tau: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, env = "EGD_SEED")]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub task: BenchTask,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
    /// GD iterations or closed-form repetitions.
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, env = "EGD_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchTask {
    GdIter,
    ClosedForm,
    Compress,
}

/// Writes either the JSON value or the key=value text.
pub fn emit(json: bool, value: &serde_json::Value, text: &str) {
    if json {
        println!("{value}");
    } else {
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.json;
    match cli.command {
        Command::Compress(a) => tabular::compress(&a, json),
        Command::Decompress(a) => tabular::decompress(&a, json),
        Command::Stats(a) => tabular::stats(&a, json),
        Command::Entropy(a) => tabular::entropy(&a, json),
        Command::Train(a) => tabular::train(&a, json),
        Command::Sample(a) => images::sample(&a, json),
        Command::Images(ImagesCommand::Compress(a)) => images::compress(&a, json),
        Command::Bench(a) => bench::run(&a, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("egd: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_are_rejected() {
        let err = Cli::try_parse_from(["egd", "stats", "x.egd", "--verbose"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::UnknownArgument);
    }

    #[test]
    fn condensed_modes_parse() {
        let cli = Cli::try_parse_from(["egd", "compress", "a.csv", "--condensed", "on-demand"]).unwrap();
        let Command::Compress(a) = cli.command else { panic!() };
        assert_eq!(CondensedMode::from(a.condensed), CondensedMode::OnDemand);
    }
}
