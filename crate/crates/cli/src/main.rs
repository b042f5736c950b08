//! `keyness` — contrastive keyword extraction over news-sharing corpora.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{DiceArgs, ExtractArgs, IngestArgs, StatsArgs, TrendArgs};
use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "keyness",
    version,
    about = "Join tweets to news articles, split by engagement dominance, and rank title words"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Join tweets to articles by URL, filter, and write a snapshot.
    Ingest(IngestArgs),
    /// Per-category engagement statistics from a snapshot.
    Stats(StatsArgs),
    /// Ranked title words per (category, action, metric).
    Extract(ExtractArgs),
    /// Dice similarity of the two dominance vocabularies per category.
    Dice(DiceArgs),
    /// Ranked title words per time bucket.
    Trend(TrendArgs),
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(args) => commands::cmd_ingest(args, file),
        Command::Stats(args) => commands::cmd_stats(args, file),
        Command::Extract(args) => commands::cmd_extract(args, file),
        Command::Dice(args) => commands::cmd_dice(args, file),
        Command::Trend(args) => commands::cmd_trend(args, file),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
