use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use loopfock::functionals::weight_table;
use loopfock::suites;
use loopfock::tables::{cocycle_table, level_table};
use loopfock_cli::{decompose, render_cocycles, render_levels, render_report, render_weights, CliError, CliResult, Settings};

#[derive(Parser)]
#[command(name = "loopfock", version, about = "Verification suites for a Fock model of loop SL_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a report. Exit status 1 if any case fails.
    Verify {
        /// JSON file with the same keys as the flags (snake_case); flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Print a reference table.
    Compute {
        table: TableKind,
        /// Rows for the cocycles table.
        #[arg(long, default_value_t = 9)]
        count: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Smith normal form of a loop matrix given as JSON (a path, or - for stdin).
    Decompose { input: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Weights,
    Levels,
    Cocycles,
}

fn settings(config: Option<PathBuf>, flags: Settings) -> CliResult<Settings> {
    let base = match config {
        Some(path) => Settings::from_file(&path)?,
        None => Settings::default(),
    };
    Ok(base.overridden_by(flags))
}

fn emit(text: &str, s: &Settings) -> CliResult<()> {
    match &s.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Verify { config, settings: flags } => {
            let s = settings(config, flags)?;
            let params = s.params()?;
            let selected = s.suites()?;
            let start = Instant::now();
            let report = suites::run(&selected, &params).map_err(|e| CliError::Config(e.to_string()))?;
            emit(&render_report(&report, s.format.unwrap_or_default())?, &s)?;
            let sm = &report.summary;
            eprintln!(
                "{} cases: {} passed, {} failed, {} skipped in {:.2}s",
                sm.total,
                sm.passed,
                sm.failed,
                sm.skipped,
                start.elapsed().as_secs_f64()
            );
            Ok(report.all_passed())
        }
        Command::Compute {
            table,
            count,
            config,
            settings: flags,
        } => {
            let s = settings(config, flags)?;
            let p = s.params()?;
            let format = s.format.unwrap_or_default();
            let fail = |e: loopfock::Error| CliError::Config(e.to_string());
            let text = match table {
                TableKind::Weights => render_weights(&weight_table(p.n).map_err(fail)?, format)?,
                TableKind::Levels => render_levels(&level_table(&p).map_err(fail)?, format)?,
                TableKind::Cocycles => render_cocycles(&cocycle_table(p.n as usize, p.seed, count).map_err(fail)?, format)?,
            };
            emit(&text, &s)?;
            Ok(true)
        }
        Command::Decompose { input } => {
            let text = if input == "-" {
                let mut buf = String::new();
                std::io::stdin()
                    .read_to_string(&mut buf)
                    .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
                buf
            } else {
                std::fs::read_to_string(&input).map_err(|e| CliError::Io(format!("{input}: {e}")))?
            };
            let out = decompose(&text)?;
            let mut s = serde_json::to_string_pretty(&out).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            print!("{s}");
            Ok(out["reconstructs"] == serde_json::Value::Bool(true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("loopfock: {e}");
            ExitCode::from(2)
        }
    }
}
