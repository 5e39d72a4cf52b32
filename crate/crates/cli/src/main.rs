use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wignerlab_cli::commands::{self, parse_dim, parse_dims, Outcome, EXIT_USAGE};
use wignerlab_cli::CliError;

/// Phase-space tools for qudit stabilizer theories.
///
/// Exit codes: 0 success or expected verdict, 1 usage error,
/// 2 unexpected verdict, 3 negatively represented circuit.
#[derive(Debug, Parser)]
#[command(name = "wignerlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the outcome-assignment constraints for one dimension.
    Uniqueness {
        #[arg(long, value_parser = parse_dim)]
        dim: u64,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the discrete Wigner function of a state file.
    Wigner {
        state: PathBuf,
        #[arg(long, value_parser = parse_dim)]
        dim: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=8))]
        qudits: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compile a circuit file and sample its measurement records.
    Simulate {
        circuit: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the uniqueness analysis over an inclusive range `a..b`.
    Sweep {
        #[arg(long, value_parser = parse_dims)]
        dims: (u64, u64),
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn emit(outcome: &Outcome, json: Option<&PathBuf>) -> Result<(), CliError> {
    let to_stdout = json.is_some_and(|p| p.as_os_str() == "-");
    let mut out = std::io::stdout().lock();
    let mut text = String::new();
    if !to_stdout {
        for line in &outcome.lines {
            text.push_str(line);
            text.push('\n');
        }
    }
    match json {
        Some(_) if to_stdout => text = outcome.report.to_json() + "\n",
        Some(path) => std::fs::write(path, outcome.report.to_json() + "\n")
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => {}
    }
    // a closed pipe (e.g. `| head`) is not an error
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Usage(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (outcome, json) = match cli.command {
        Command::Uniqueness { dim, json } => (commands::uniqueness(dim)?, json),
        Command::Wigner { state, dim, qudits, json } => (commands::wigner_table(&state, dim, qudits as usize)?, json),
        Command::Simulate { circuit, shots, seed, json } => (commands::simulate(&circuit, shots, seed)?, json),
        Command::Sweep { dims: (a, b), json } => (commands::sweep(a, b)?, json),
    };
    emit(&outcome, json.as_ref())?;
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
