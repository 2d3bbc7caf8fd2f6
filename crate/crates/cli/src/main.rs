//! `parasift`: generate, filter and evaluate paraphrases from the command line.
//!
//! Exit status is 0 on success, 1 for configuration and input errors, and 2
//! when a translator or scorer endpoint fails under the fail-hard policy.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use parasift_core::ErrorPolicy;

mod commands;
mod config;
mod jsonl;

#[derive(Parser, Debug)]
#[command(name = "parasift", version, about = "Paraphrase candidate generation and selection")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Translator endpoint: an http(s) base URL or mock:<tables.json>.
    #[arg(long, global = true)]
    pub translator: Option<String>,

    /// Fluency scorer: an http(s) base URL or local:<model file>.
    #[arg(long, global = true)]
    pub fluency: Option<String>,

    /// Semantic scorer: an http(s) base URL, local, or local:<idf corpus>.
    #[arg(long, global = true)]
    pub semantic: Option<String>,

    /// Local fluency model used when a remote fluency scorer fails under --on-error fallback.
    #[arg(long, global = true)]
    pub fluency_fallback: Option<String>,

    /// Source language code.
    #[arg(long, global = true)]
    pub lang: Option<String>,

    /// Comma-separated pivot languages, e.g. fr,de.
    #[arg(long, global = true)]
    pub pool: Option<String>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Include the full selection trace in filter output.
    #[arg(long, global = true)]
    pub trace: bool,

    /// Abort on the first invalid input line.
    #[arg(long, global = true)]
    pub strict: bool,

    #[arg(long, global = true, value_parser = parse_policy)]
    pub on_error: Option<ErrorPolicy>,
}

fn parse_policy(s: &str) -> Result<ErrorPolicy, String> {
    s.parse::<ErrorPolicy>().map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct Io {
    /// Input file; stdin when absent or `-`.
    pub input: Option<PathBuf>,

    /// Output file; stdout when absent or `-`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Produce candidate paraphrases for {"id","text"} lines.
    Generate(Io),
    /// Select the best candidate for each generated line.
    Filter(Io),
    /// Generate and filter in one pass.
    Paraphrase(Io),
    /// Score system outputs: semantic, diversity and fluency.
    Eval {
        #[command(flatten)]
        io: Io,
        /// Evaluate the sources themselves as outputs.
        #[arg(long)]
        baseline: bool,
    },
    /// Add label-preserving paraphrases to a labeled dataset (JSONL or CSV).
    Augment {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1)]
        multiplicity: usize,
        /// Also paraphrase rows that are themselves augmentations.
        #[arg(long)]
        paraphrase_augmented: bool,
        /// Write augmentation statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Balance a labeled dataset by down-sampling to the minority label.
    Subsample {
        #[command(flatten)]
        io: Io,
        /// Keep only this fraction of the balanced per-label count.
        #[arg(long)]
        keep_fraction: Option<f64>,
    },
    /// Train the local trigram language model.
    TrainLm {
        /// One sentence per line.
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Trigram, bigram and unigram weights.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        add_k: Option<f64>,
    },
    /// Serve mock translation tables over the translator protocol.
    MockTranslator {
        /// Mock tables JSON.
        #[arg(long)]
        tables: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// 0 picks a free port.
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<config::ConfigError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<parasift_core::Error>() {
            if e.is_transport() {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command, &cli.global) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
