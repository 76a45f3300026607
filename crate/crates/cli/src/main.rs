use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod assess;
mod combine;
mod error;
mod evolve;
mod output;
mod sources;
mod trend;

#[derive(Debug, Parser)]
#[command(name = "innometer", version, about = "Innovativeness indicators from search evidence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Novelty and relevance of search patterns against evidence sources.
    Assess(assess::AssessArgs),
    /// Fuse two assessment reports with Dempster's rule.
    Combine(combine::CombineArgs),
    /// Evolve a linguistic model from reference terms.
    Evolve(evolve::EvolveArgs),
    /// Per-year novelty and relevance with linear trends.
    Trend(trend::TrendArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Assess(args) => assess::run(args),
        Command::Combine(args) => combine::run(args),
        Command::Evolve(args) => evolve::run(args),
        Command::Trend(args) => trend::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
