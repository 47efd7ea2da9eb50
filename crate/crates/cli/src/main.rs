use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use uncloneable_cli::{ExperimentConfig, ExperimentRegistry};

const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "uncloneable",
    version,
    about = "Seeded experiments on uncloneable encryption"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Indistinguishability attack against its lower bound.
    Lemma1,
    /// Random-basis attack on uniform Haar schemes.
    Theorem2,
    /// Two-party one-way-to-hiding counterexample.
    O2h,
    /// Expected max-over-sum of exponential variables.
    Erlang,
    /// Seesaw optimization warm-started from an attack.
    Seesaw,
    /// Reduction from cloning attacks to monogamy games.
    Meg,
    /// Seesaw estimates across rank profiles (no pass/fail).
    ConjectureScan,
    /// Fast fixed-seed self checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Lemma1 => "lemma1",
            Command::Theorem2 => "theorem2",
            Command::O2h => "o2h",
            Command::Erlang => "erlang",
            Command::Seesaw => "seesaw",
            Command::Meg => "meg",
            Command::ConjectureScan => "conjecture-scan",
            Command::Selftest => "selftest",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.trials.is_some() {
        cfg.trials = cli.trials;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    let name = cli.command.name();
    let report = ExperimentRegistry::with_defaults().execute(name, &cfg)?;
    let text = if cli.json {
        report.to_json_string()
    } else {
        report.to_csv_string()
    };
    match &cfg.out {
        Some(path) => fs::write(path, &text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    let failures = report.failures();
    if failures > 0 {
        eprintln!("{name}: {failures} of {} rows failed", report.rows.len());
    }
    Ok(failures == 0)
}
