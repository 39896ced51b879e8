//! Flag definitions and `--config` merging.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "revdict", version, about = "Reverse dictionary: find the word that fits a definition")]
pub struct Cli {
    /// Flat `key=value` file supplying defaults for the subcommand's flags
    /// (keys are flag names without dashes); explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extract definitions from Webster-format text into a dataset file.
    Prepare(PrepareArgs),
    /// Train a reverse-dictionary model and write a checkpoint.
    Train(TrainArgs),
    /// Top-k accuracy of a checkpoint on a test set.
    Eval(EvalArgs),
    /// Rank words for a definition; reads definitions from stdin when none is given.
    Query(QueryArgs),
    /// Train a sentence-polarity classifier, optionally on top of a checkpoint.
    Classify(ClassifyArgs),
    /// Print a checkpoint's header, configuration and parameter shapes.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    /// Webster-format dictionary text.
    #[arg(long, value_name = "FILE")]
    pub dict: PathBuf,
    /// CoNLL-U parses, one block per extracted definition, in order.
    #[arg(long, value_name = "FILE")]
    pub conllu: Option<PathBuf>,
    /// Output dataset; the vocabulary goes to `<out>.vocab`.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Shuffled copies per definition, including the original.
    #[arg(long, default_value_t = 1, value_parser = parse_factor)]
    pub augment: usize,
    /// Seed for the shuffled copies.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, default_value = "tree_shared", value_parser = MODEL_KINDS)]
    pub model: String,
    /// Dataset written by `prepare`, or Webster-format text.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Parses for `--data` when it is Webster-format text.
    #[arg(long, value_name = "FILE")]
    pub conllu: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value = "adam", value_parser = ["adam", "sgd"])]
    pub optimizer: String,
    /// Score against a separate output embedding table instead of the input one.
    #[arg(long, action = ArgAction::SetTrue)]
    pub wout_separate: bool,
    /// Examples per optimizer step [default: 1 for tree models, 32 for lstm].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Stop after this many optimizer steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 256)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 10)]
    pub gate_hidden: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Checkpoint to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Per-epoch metrics as JSON lines [default: <out>.metrics.jsonl].
    #[arg(long, value_name = "FILE")]
    pub metrics: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    /// Dataset written by `prepare`, or Webster-format text.
    #[arg(long, value_name = "FILE")]
    pub test: PathBuf,
    /// Parses for `--test` when it is Webster-format text.
    #[arg(long, value_name = "FILE")]
    pub conllu: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Accepted for uniformity; evaluation draws no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    /// Definition text; omit to read one definition per line from stdin.
    pub definition: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// CoNLL-U parse of the definition. Without one, tree models treat the
    /// first word as the head of all others.
    #[arg(long, value_name = "FILE")]
    pub conllu: Option<PathBuf>,
    /// Accepted for uniformity; queries draw no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, default_value = "end_to_end", value_parser = ["end_to_end", "frozen", "fine_tune"])]
    pub mode: String,
    /// Pretrained checkpoint (required for frozen and fine_tune).
    #[arg(long, value_name = "FILE")]
    pub base: Option<PathBuf>,
    /// Positive sentences, one per line.
    #[arg(long, value_name = "FILE")]
    pub pos: PathBuf,
    /// Negative sentences, one per line.
    #[arg(long, value_name = "FILE")]
    pub neg: PathBuf,
    /// CoNLL-U parses of `--pos`, needed by tree models.
    #[arg(long, value_name = "FILE")]
    pub pos_conllu: Option<PathBuf>,
    /// CoNLL-U parses of `--neg`, needed by tree models.
    #[arg(long, value_name = "FILE")]
    pub neg_conllu: Option<PathBuf>,
    /// Encoder for end_to_end; transfer modes use the base's.
    #[arg(long, default_value = "lstm", value_parser = MODEL_KINDS)]
    pub model: String,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Examples per optimizer step [default: 1 for tree models, 32 for lstm].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Share of sentences held out for testing.
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 32)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 256)]
    pub hidden_dim: usize,
    /// Initialization, shuffling and the train/test split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Classifier checkpoint to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Per-epoch metrics as JSON lines.
    #[arg(long, value_name = "FILE")]
    pub metrics: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    /// Accepted for uniformity; inspection draws no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

const MODEL_KINDS: [&str; 3] = ["lstm", "tree_shared", "tree_gated"];

fn parse_factor(s: &str) -> Result<usize, String> {
    match s.parse() {
        Ok(f @ (1 | 10 | 100 | 1000)) => Ok(f),
        _ => Err("expected one of 1, 10, 100, 1000".into()),
    }
}

/// Why the command line could not be turned into a [`Cli`].
#[derive(Debug)]
pub enum ParseFailure {
    /// `--help`, `--version` and clap usage errors; clap renders these.
    Clap(clap::Error),
    /// A bad `--config` file.
    Config(String),
    /// The config file could not be read.
    Io(String),
}

/// Parses `argv` after inserting flags from the `--config` file for every
/// key not already given on the command line.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let argv = match config_path(&argv) {
        Some(path) => with_config(argv, &path)?,
        None => argv,
    };
    let matches = Cli::command().try_get_matches_from(argv).map_err(ParseFailure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(ParseFailure::Clap)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn with_config(argv: Vec<OsString>, path: &std::path::Path) -> Result<Vec<OsString>, ParseFailure> {
    let cmd = Cli::command();
    let Some(pos) = argv.iter().position(|a| cmd.find_subcommand(a).is_some()) else {
        // no subcommand: let clap report it
        return Ok(argv);
    };
    let sub = cmd.find_subcommand(&argv[pos]).expect("found above");
    let given: Vec<String> = argv[pos + 1..]
        .iter()
        .map(|a| a.to_string_lossy())
        .take_while(|a| a != "--")
        .filter_map(|a| a.strip_prefix("--").map(|f| f.split('=').next().unwrap_or_default().to_string()))
        .collect();

    let text = std::fs::read_to_string(path).map_err(|e| ParseFailure::Io(format!("{}: {e}", path.display())))?;
    let pairs =
        revdict::harness::parse_kv(&text).map_err(|e| ParseFailure::Config(format!("{}: {e}", path.display())))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in pairs {
        let long = key.replace('_', "-");
        let arg = sub.get_arguments().find(|a| a.get_long() == Some(long.as_str()) && long != "config");
        let Some(arg) = arg else {
            return Err(ParseFailure::Config(format!(
                "{}: unknown key {key:?} for {}",
                path.display(),
                sub.get_name()
            )));
        };
        if given.contains(&long) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" => extra.push(format!("--{long}").into()),
                "false" => {}
                _ => return Err(ParseFailure::Config(format!("{}: {key} must be true or false", path.display()))),
            }
        } else {
            extra.push(format!("--{long}={value}").into());
        }
    }
    let mut merged: Vec<OsString> = argv[..=pos].to_vec();
    merged.extend(extra);
    merged.extend(argv[pos + 1..].iter().cloned());
    Ok(merged)
}
