use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use semifix_core::command::{emit_report, execute, Command, Format, Options};
use semifix_core::problem::parse_problem_file;
use semifix_core::SetEdgeSemantics;

/// Fixed-point analysis of set-valued maps on finite semi-metric spaces.
#[derive(Debug, Parser)]
#[command(name = "semifix", version)]
struct Cli {
    /// Emit canonical JSON instead of text.
    #[arg(long, global = true)]
    machine: bool,

    /// Override the instance's set-edge semantics.
    #[arg(long, global = true, value_name = "existential|universal")]
    semantics: Option<SetEdgeSemantics>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Run every validator on the instance.
    Validate { file: PathBuf },
    /// Print the Pompeiu-Hausdorff matrix of the family.
    Hausdorff { file: PathBuf },
    /// Compute the contraction constant and edge preservation.
    Analyze { file: PathBuf },
    /// Iterate the map from a family member.
    Iterate {
        file: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// List the fixed members of the map.
    FixedPoints { file: PathBuf },
    /// Check the fixed-point statements and their hypotheses.
    Theorem { file: PathBuf },
    /// Test epsilon-chainability of the point space.
    Chainable {
        file: PathBuf,
        #[arg(long)]
        epsilon: String,
    },
    /// Check the integral contraction condition.
    Integral {
        file: PathBuf,
        #[arg(long)]
        alpha: String,
        /// `const:<c>`, `poly:<c0>,<c1>,...` or `table:<path>`.
        #[arg(long)]
        gamma: String,
    },
}

fn split(sub: Sub) -> (PathBuf, Command) {
    match sub {
        Sub::Validate { file } => (file, Command::Validate),
        Sub::Hausdorff { file } => (file, Command::Hausdorff),
        Sub::Analyze { file } => (file, Command::Analyze),
        Sub::Iterate { file, start, max_steps } => (file, Command::Iterate { start, max_steps }),
        Sub::FixedPoints { file } => (file, Command::FixedPoints),
        Sub::Theorem { file } => (file, Command::Theorem),
        Sub::Chainable { file, epsilon } => (file, Command::Chainable { epsilon }),
        Sub::Integral { file, alpha, gamma } => (file, Command::Integral { alpha, gamma }),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let format = if cli.machine { Format::Machine } else { Format::Text };
    let options = Options { semantics: cli.semantics };
    let (file, command) = split(cli.command);
    let problem = parse_problem_file(&file).with_context(|| format!("invalid instance {}", file.display()))?;
    log::debug!("loaded {} in {:?} mode", file.display(), problem.config().mode);
    let report = execute(&command, &problem, &options)?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(emit_report(&report, format).as_bytes())?;
    stdout.flush()?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
