//! `metaembed`: ingest embedding sets, build averaged and concatenated
//! meta-embeddings, measure cross-set angle statistics, and evaluate on
//! word-similarity and analogy benchmarks.

mod commands;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use metaembed::io::Format;
use metaembed::{Method, PadSide, PadSpec};

#[derive(Parser)]
#[command(name = "metaembed", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load an embedding file, preprocess it, and write a native container.
    Ingest(IngestArgs),
    /// Combine two or more native files by averaging or concatenation.
    Combine(CombineArgs),
    /// Sample angles between cross-set difference vectors.
    Angles(AnglesArgs),
    /// Evaluate native files on similarity and analogy datasets.
    Eval(EvalArgs),
    /// Run a full pipeline from a TOML config file.
    Run(RunArgs),
}

#[derive(clap::Args)]
pub struct IngestArgs {
    pub input: PathBuf,
    /// text, word2vec or native.
    #[arg(long, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
    /// Drop tokens containing this string (e.g. "_" for phrases).
    #[arg(long, value_name = "STR")]
    pub drop_containing: Option<String>,
    /// l2-normalize each dimension across the vocabulary.
    #[arg(long)]
    pub norm_dims: bool,
    /// l2-normalize each word vector.
    #[arg(long)]
    pub norm_vectors: bool,
    /// Zero-pad every vector, e.g. rear:200.
    #[arg(long, value_name = "SIDE:COUNT")]
    pub pad: Option<PadSpec>,
}

#[derive(clap::Args)]
pub struct CombineArgs {
    /// Native files, at least two.
    #[arg(required = true, num_args = 2..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub method: Method,
    #[arg(long)]
    pub out: PathBuf,
    /// Zero-pad smaller sources up to the largest dimension (average only).
    #[arg(long)]
    pub pad_to_common: bool,
    /// Pad side per input, comma separated; defaults to rear.
    #[arg(long, value_delimiter = ',')]
    pub pad_sides: Vec<PadSide>,
    /// l2-normalize the combined vectors.
    #[arg(long)]
    pub normalize_output: bool,
}

#[derive(clap::Args)]
pub struct AnglesArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    #[arg(long, default_value_t = 200_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = metaembed::angles::HISTOGRAM_BINS)]
    pub bins: usize,
    /// Histogram CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct EvalArgs {
    /// Native files to evaluate.
    #[arg(required = true)]
    pub sets: Vec<PathBuf>,
    /// Similarity dataset file or directory of files; repeatable.
    #[arg(long)]
    pub sim: Vec<PathBuf>,
    /// Analogy dataset file; repeatable.
    #[arg(long)]
    pub analogy: Vec<PathBuf>,
    /// Result CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RunArgs {
    pub config: PathBuf,
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Ingest(args) => {
            let steps = ingest_steps(&args, sub(&matches, "ingest"));
            commands::ingest(&args, &steps)
        }
        Command::Combine(args) => commands::combine(&args),
        Command::Angles(args) => commands::angles(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Run(args) => pipeline::run(&args.config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn sub<'a>(matches: &'a ArgMatches, name: &str) -> &'a ArgMatches {
    matches.subcommand_matches(name).expect("dispatched on this subcommand")
}

/// Preprocessing steps in the order their flags appear on the command line.
fn ingest_steps(args: &IngestArgs, matches: &ArgMatches) -> Vec<config::Step> {
    let index = |id: &str| matches.index_of(id).unwrap_or(usize::MAX);
    let mut steps = Vec::new();
    if args.norm_dims {
        steps.push((index("norm_dims"), config::Step::NormDims));
    }
    if args.norm_vectors {
        steps.push((index("norm_vectors"), config::Step::NormVectors));
    }
    if let Some(spec) = args.pad {
        steps.push((index("pad"), config::Step::Pad(spec)));
    }
    steps.sort_by_key(|(i, _)| *i);
    steps.into_iter().map(|(_, s)| s).collect()
}
