use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anticyclo::{failure_records, run, write_report, CliError, Command, Format, RunConfig};
use clap::Parser;

/// Exact local computations for anticyclotomic p-adic L-functions.
#[derive(Debug, Parser)]
#[command(name = "anticyclo", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Worker threads for the sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// p-adic precision M (values mod p^M).
    #[arg(long)]
    precision: Option<u32>,
    /// Oracle truncation N.
    #[arg(long)]
    truncation: Option<u32>,
    /// Seed for the randomized checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.precision {
        cfg.precision = m;
    }
    if let Some(n) = cli.truncation {
        cfg.truncation = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let format = Format::parse(cli.format.as_deref().or(cfg.format.as_deref()).unwrap_or("json"))?;
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let report = run(cli.command, &cfg)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    write_report(&mut out, format, &report)?;
    out.flush().map_err(io)?;
    for rec in failure_records(&report) {
        eprintln!("{rec}");
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
