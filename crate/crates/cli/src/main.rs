use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use epswb_cli::report::EXIT_INPUT;
use epswb_cli::{demo, run, Options, SpecError};
use epswb_core::Exec;

#[derive(Parser)]
#[command(name = "epswb", version, about = "Checks ε-calculus, realizability and finite-topos assertions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the assertions of a spec file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a built-in scenario.
    Demo {
        name: Demo,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    #[value(name = "demo-sets")]
    Sets,
    #[value(name = "demo-sets2")]
    Sets2,
    #[value(name = "demo-eff")]
    Eff,
    #[value(name = "demo-epsilon-rules")]
    EpsilonRules,
}

#[derive(Args)]
struct Flags {
    /// Reduction steps per evaluation.
    #[arg(long, env = "EPSWB_BUDGET")]
    budget: Option<u64>,
    /// Track-search depth.
    #[arg(long, env = "EPSWB_DEPTH")]
    depth: Option<usize>,
    /// Component size bound for exhaustive topos checks.
    #[arg(long, env = "EPSWB_BOUND")]
    bound: Option<usize>,
    /// Write line-delimited JSON records here.
    #[arg(long, env = "EPSWB_EMIT")]
    emit: Option<PathBuf>,
    /// Evaluate on one thread.
    #[arg(long, env = "EPSWB_SEQUENTIAL")]
    sequential: bool,
}

fn execute(text: &str, flags: &Flags) -> anyhow::Result<u8> {
    if flags.budget == Some(0) {
        anyhow::bail!("--budget must be positive");
    }
    let spec = epswb_cli::parse(text)?;
    let exec = if flags.sequential { Exec::Sequential } else { Exec::default() };
    let opts = Options { budget: flags.budget, depth: flags.depth, bound: flags.bound, exec };
    let report = run(&spec, &opts);
    print!("{}", report.text());
    if let Some(path) = &flags.emit {
        std::fs::write(path, report.jsonl()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (origin, text, flags) = match cli.command {
        Command::Run { file, flags } => match std::fs::read_to_string(&file) {
            Ok(t) => (file.display().to_string(), t, flags),
            Err(source) => {
                eprintln!("error: {}", SpecError::Io { path: file.display().to_string(), source });
                return ExitCode::from(EXIT_INPUT);
            }
        },
        Command::Demo { name, flags } => {
            let key = name.to_possible_value().expect("named").get_name().to_string();
            (key.clone(), demo(&key).expect("embedded").to_string(), flags)
        }
    };
    match execute(&text, &flags) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {origin}: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
