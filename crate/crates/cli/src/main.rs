//! Command-line front end for the A* CCG parser.

use std::path::PathBuf;
use std::process::ExitCode;

use astarccg::{HeadScheme, OutputFormat};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;

#[derive(Debug, Parser)]
#[command(
    name = "astarccg",
    version,
    about = "Exact A* CCG parsing over factored supertag and head scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse every sentence of a score file.
    Parse(ParseArgs),
    /// Compare the A* engine with the exhaustive oracle.
    Check(CheckArgs),
    /// Re-extract dependencies from JSON derivation records.
    Convert(ConvertArgs),
    /// Summarise JSON derivation records.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        s == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Lewis,
    Headfirst,
    Headfinal,
}

impl From<SchemeArg> for HeadScheme {
    fn from(s: SchemeArg) -> HeadScheme {
        match s {
            SchemeArg::Lewis => HeadScheme::LewisRule,
            SchemeArg::Headfirst => HeadScheme::HeadFirst,
            SchemeArg::Headfinal => HeadScheme::HeadFinal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Deriv,
    Conll,
    Tikz,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Deriv => OutputFormat::Deriv,
            FormatArg::Conll => OutputFormat::Conll,
            FormatArg::Tikz => OutputFormat::Tikz,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// Engine settings. Explicit flags override `--config`, which overrides
/// the built-in defaults.
#[derive(Debug, Args)]
struct EngineArgs {
    /// Head scheme [default: headfirst]
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Normal-form constraints [default: on]
    #[arg(long, value_enum)]
    nf: Option<Switch>,
    /// Drop tags below beta times the best tag of the word [default: 0.00001]
    #[arg(long)]
    beta: Option<f64>,
    /// Keep at most this many tags per word [default: 50]
    #[arg(long)]
    max_tags: Option<usize>,
    /// Ignore head scores.
    #[arg(long)]
    no_dep: bool,
    /// File of `key = value` engine settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict frequent words to their dictionary categories (`word<TAB>cat cat`).
    #[arg(long)]
    tag_dict: Option<PathBuf>,
    #[arg(long, hide = true)]
    corrupt_heuristic: bool,
}

#[derive(Debug, Args)]
struct ParseArgs {
    /// JSONL score file.
    #[arg(long)]
    scores: PathBuf,
    /// Whitespace-tokenised sentences, one per line; replaces the tokens of
    /// the score file.
    #[arg(long)]
    sentences: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "deriv")]
    format: FormatArg,
    /// Print every agenda pop to standard error.
    #[arg(long)]
    trace: bool,
    /// Worker threads.
    #[arg(long, env = "ASTARCCG_JOBS", default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Score file to check instead of random instances.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Number of random instances.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Tag pruning threshold used by both searches.
    #[arg(long, default_value_t = 0.00001)]
    beta: f64,
    #[arg(long, default_value_t = 50)]
    max_tags: usize,
    #[arg(long, hide = true)]
    corrupt_heuristic: bool,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// JSON derivation records.
    #[arg(long)]
    deriv: PathBuf,
    #[arg(long, value_enum, default_value = "headfirst")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// JSON derivation records.
    #[arg(long)]
    deriv: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!("error:usage: {}", first.trim_start_matches("error: "));
            for line in rendered.lines().skip(1).filter(|l| !l.trim().is_empty()) {
                eprintln!("{line}");
            }
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Parse(args) => commands::parse(args),
        Command::Check(args) => commands::check(args),
        Command::Convert(args) => commands::convert(args),
        Command::Stats(args) => commands::stats(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error:{}: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
