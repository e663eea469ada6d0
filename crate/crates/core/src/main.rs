use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use xzdelegate::config::ExperimentConfig;
use xzdelegate::report::{self, Command};
use xzdelegate::Error;

/// Simulated verifiable delegation of quantum sampling.
#[derive(Debug, Parser)]
#[command(name = "xzdelegate", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Write the JSON record here instead of stdout. The per-trial trace
    /// goes next to it with a `.trace` suffix.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Trial count; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,

    /// Print the per-trial trace to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Compile the circuit into its Hamiltonian and report the weights.
    Compile,
    /// Low end of the spectrum and the gap.
    Spectrum,
    /// Single-shot energy test statistics.
    Vgs,
    /// Cut-and-choose sampling with a quantum verifier.
    Qpip1,
    /// Classical-verifier sampling over the measurement functionality.
    Qpip0,
    /// The blindness compiler and its harnesses.
    Blind,
}

impl From<&Cmd> for Command {
    fn from(c: &Cmd) -> Self {
        match c {
            Cmd::Compile => Command::Compile,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Vgs => Command::Vgs,
            Cmd::Qpip1 => Command::Qpip1,
            Cmd::Qpip0 => Command::Qpip0,
            Cmd::Blind => Command::Blind,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
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
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Protocol(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| report::run((&cli.command).into(), &cfg)).and_then(|out| {
        if cli.verbose {
            if let Some(trace) = &out.trace {
                eprint!("{trace}");
            }
        }
        match &cli.out {
            Some(path) => {
                write(path, &out.render())?;
                if let Some(trace) = &out.trace {
                    let mut p = path.clone().into_os_string();
                    p.push(".trace");
                    write(&PathBuf::from(p), trace)?;
                }
            }
            None => print!("{}", out.render()),
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
