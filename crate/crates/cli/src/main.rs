mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Log filter variable, e.g. `FDASEL_LOG=info`.
const LOG_ENV: &str = "FDASEL_LOG";

#[derive(Parser)]
#[command(name = "fdasel", version, about = "Feature-decay selection over multi-system backtranslation pools")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank (system, target) pairs of a pool against a seed corpus
    Select(SelectArgs),
    /// Corpus BLEU, TER and chrF3 of a hypothesis file
    Evaluate(EvaluateArgs),
    /// TTR, Yule's I and MTLD of a corpus
    Diversity(DiversityArgs),
    /// Build the per-system factor table
    RescoreFactors(RescoreArgs),
    /// Selection histogram, length and diversity tables
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    /// from-all, each-from-all, each-from-all-x4 or each-from-all-rs
    #[arg(long)]
    pub strategy: String,
    /// Seed corpus (in-domain text on the same side as the pool sources)
    #[arg(long)]
    pub seed: PathBuf,
    /// Pool manifest
    #[arg(long)]
    pub pool: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Number of pairs, or "all-targets"
    #[arg(long, default_value = "all-targets")]
    pub budget: String,
    /// Factor table, required by each-from-all-rs
    #[arg(long)]
    pub factors: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Maximum n-gram order
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u16).range(1..))]
    pub order: u16,
    #[arg(long)]
    pub lowercase: bool,
    /// Count each shared n-gram once per candidate when scoring
    #[arg(long)]
    pub count_distinct: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Smoothing {
    None,
    AddOne,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_enum, default_value_t = Smoothing::None)]
    pub smoothing: Smoothing,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Args, Debug)]
pub struct DiversityArgs {
    /// Corpus file
    pub input: PathBuf,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Args, Debug)]
pub struct RescoreArgs {
    /// Devset reference (computed mode)
    #[arg(long = "ref", conflicts_with = "supplied")]
    pub reference: Option<PathBuf>,
    /// NAME=DEVSET_HYP[,BACKTRANSLATION]; repeat once per system
    #[arg(long = "system", value_name = "SPEC")]
    pub systems: Vec<String>,
    /// Pool manifest providing backtranslations not given per system
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// JSON with externally measured values (supplied mode)
    #[arg(long)]
    pub supplied: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// selection.tsv written by `select`
    #[arg(long)]
    pub selection: PathBuf,
    /// The pool manifest the selection was made from
    #[arg(long)]
    pub pool: PathBuf,
    /// Devset source side, added as a row of the length and diversity tables
    #[arg(long)]
    pub devset: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = fdasel::DEFAULT_BIN_SIZE)]
    pub bin_size: usize,
    /// Also write histogram.csv
    #[arg(long)]
    pub csv: bool,
    /// Must match the flag used for `select`
    #[arg(long)]
    pub lowercase: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.into()).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let run = std::panic::catch_unwind(|| match cli.command {
        Command::Select(a) => commands::select(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Diversity(a) => commands::diversity(&a),
        Command::RescoreFactors(a) => commands::rescore_factors(&a),
        Command::Report(a) => commands::report(&a),
    });
    match run {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(failure)) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.kind as u8)
        }
        // the panic hook has already printed the message
        Err(_) => ExitCode::from(commands::FailureKind::Internal as u8),
    }
}
