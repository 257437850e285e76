use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgspec::cli::{run, CliError, Command, Overrides, EXIT_CONFIG};
use qgspec::config::load_config;

/// Certified spectra of scaling quantum graphs.
#[derive(Parser)]
#[command(name = "qgspec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigen-wavenumbers as CSV `n,k_n,E_n,enclosure`.
    Solve(Opts),
    /// Canonical secular series, regularization order and amplitude sum as JSON.
    Series(Opts),
    /// Compare the descent solver with a dense-scan oracle; exit 4 on mismatch.
    Verify(Opts),
    /// Every level of the derivative chain on a uniform grid, as CSV.
    Sample(Opts),
}

#[derive(Args)]
struct Opts {
    /// JSON problem description.
    config: PathBuf,
    #[arg(long)]
    kmin: Option<f64>,
    #[arg(long)]
    kmax: Option<f64>,
    /// Headroom below 1 required of the regular level.
    #[arg(long)]
    margin: Option<f64>,
    /// Oracle grid points per leading half-period.
    #[arg(long)]
    oversampling: Option<usize>,
    /// Sample grid points per leading half-period.
    #[arg(long)]
    density: Option<usize>,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(command: Command, opts: &Opts) -> Result<i32, CliError> {
    let text = fs::read_to_string(&opts.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", opts.config.display())))?;
    let doc = load_config(&text)?;
    let overrides = Overrides {
        kmin: opts.kmin,
        kmax: opts.kmax,
        margin: opts.margin,
        oversampling: opts.oversampling,
        density: opts.density,
    };
    let mut sink: Box<dyn Write> = match &opts.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let code = run(command, &doc, &overrides, &mut sink)?;
    sink.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Cmd::Solve(o) => (Command::Solve, o),
        Cmd::Series(o) => (Command::Series, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Sample(o) => (Command::Sample, o),
    };
    let code = match execute(command, opts) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_CONFIG as u8))
}
