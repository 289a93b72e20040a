use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use filingtopics::config::{Config, Overrides, KEYS_HELP};
use filingtopics::error::PipelineError;
use filingtopics::pipeline::{self, StageReport};

/// Topic models of corporate filings and the stock-market reaction to them.
#[derive(Debug, Parser)]
#[command(name = "filingtopics", version, after_long_help = KEYS_HELP, after_help = KEYS_HELP)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// overrides `seed`
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// overrides `paths.out`
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// overrides `lda.k`
    #[arg(long, global = true, value_name = "INT")]
    k: Option<usize>,
    /// overrides `relevance.lambda`
    #[arg(long, global = true, value_name = "FLOAT")]
    lambda: Option<f64>,
    /// overrides `paths.stopwords`
    #[arg(long, global = true, value_name = "PATH")]
    stopwords: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter the corpus and build the document-term matrix
    Prep,
    /// Fit the topic model with `lda.k` topics
    Fit,
    /// Rank topic terms and assign documents to topics
    Topics,
    /// Compute abnormal returns around each filing
    Events,
    /// Write the descriptive and per-topic tables
    Report,
    /// Generate a synthetic corpus with known topics and return shocks
    Synth(SynthArgs),
    /// Run prep, fit, topics, events and report
    All,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// overrides `synth.k`
    #[arg(long, value_name = "INT")]
    topics: Option<usize>,
    /// overrides `synth.docs`
    #[arg(long, value_name = "INT")]
    docs: Option<usize>,
    /// overrides `synth.vocab`
    #[arg(long, value_name = "INT")]
    vocab: Option<usize>,
    /// overrides `synth.doc_len`
    #[arg(long, value_name = "INT")]
    doc_len: Option<usize>,
    /// overrides `synth.shocks`, comma separated
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    shocks: Option<Vec<f64>>,
}

fn load_config(global: &Global) -> Result<Config, PipelineError> {
    let mut config = match &global.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    config.apply(&Overrides {
        seed: global.seed,
        out: global.out.clone(),
        k: global.k,
        lambda: global.lambda,
    });
    if let Some(p) = &global.stopwords {
        config.paths.stopwords = Some(p.clone());
    }
    Ok(config)
}

fn print_report(report: &StageReport) {
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    println!("{}: {}", report.stage, rows.join(" "));
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.global)?;
    let reports = match cli.command {
        Command::Prep => vec![pipeline::prep(&config)?],
        Command::Fit => vec![pipeline::fit(&config)?],
        Command::Topics => vec![pipeline::topics(&config)?],
        Command::Events => vec![pipeline::events(&config)?],
        Command::Report => vec![pipeline::report(&config)?],
        Command::All => pipeline::all(&config)?,
        Command::Synth(args) => {
            let s = &mut config.synth;
            s.k = args.topics.unwrap_or(s.k);
            s.docs = args.docs.unwrap_or(s.docs);
            s.vocab = args.vocab.unwrap_or(s.vocab);
            s.doc_len = args.doc_len.unwrap_or(s.doc_len);
            if let Some(shocks) = args.shocks {
                s.shocks = shocks;
            }
            let report = pipeline::synth(&config)?;
            println!("wrote {}", config.paths.out.display());
            vec![report]
        }
    };
    for r in &reports {
        print_report(r);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<PipelineError>()
                .map(PipelineError::exit_code)
                .unwrap_or(3);
            ExitCode::from(code as u8)
        }
    }
}
