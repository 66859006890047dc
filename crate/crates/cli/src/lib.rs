//! Command-line surface for `anticyclo-core`: TOML configs, parallel sweeps,
//! and deterministic JSON / CSV tables.

pub mod algebra;
pub mod config;
pub mod output;
pub mod sweep;

use clap::ValueEnum;

pub use config::RunConfig;
pub use output::{Format, Row};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] anticyclo_core::Error),
}

impl CliError {
    /// `2` for anything the user can fix in the config, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Command {
    LocalIntegral,
    Exceptional,
    Euler,
    Pairing,
    Iwasawa,
    Cocycle,
    Linvariant,
    Interpolate,
    Derivative,
    DiscreteSeries,
    VerifyAll,
}

impl Command {
    pub const SUITE: [Command; 10] = [
        Command::LocalIntegral,
        Command::Exceptional,
        Command::Euler,
        Command::Pairing,
        Command::Iwasawa,
        Command::Cocycle,
        Command::Linvariant,
        Command::Interpolate,
        Command::Derivative,
        Command::DiscreteSeries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::LocalIntegral => "local-integral",
            Command::Exceptional => "exceptional",
            Command::Euler => "euler",
            Command::Pairing => "pairing",
            Command::Iwasawa => "iwasawa",
            Command::Cocycle => "cocycle",
            Command::Linvariant => "linvariant",
            Command::Interpolate => "interpolate",
            Command::Derivative => "derivative",
            Command::DiscreteSeries => "discrete-series",
            Command::VerifyAll => "verify-all",
        }
    }
}

/// Output of one subcommand: `(section, rows)` pairs, sorted within each section.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub sections: Vec<(&'static str, Vec<Row>)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|(_, rows)| rows.iter().all(|r| r.pass))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&'static str, &Row)> {
        self.sections.iter().flat_map(|(s, rows)| rows.iter().map(move |r| (*s, r)))
    }
}

fn run_one(cmd: Command, cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = match cmd {
        Command::LocalIntegral => sweep::local_integral(cfg)?,
        Command::Exceptional => sweep::exceptional(cfg)?,
        Command::Euler => sweep::euler(cfg)?,
        Command::Pairing => sweep::pairing(cfg)?,
        Command::Iwasawa => algebra::iwasawa(cfg)?,
        Command::Cocycle => algebra::cocycle(cfg)?,
        Command::Linvariant => algebra::linvariant(cfg)?,
        Command::Interpolate => algebra::interpolate(cfg)?,
        Command::Derivative => algebra::derivative(cfg)?,
        Command::DiscreteSeries => algebra::discrete_series(cfg)?,
        Command::VerifyAll => unreachable!("expanded by run"),
    };
    output::sort_rows(&mut rows);
    Ok(rows)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let cmds: Vec<Command> = if cmd == Command::VerifyAll { Command::SUITE.to_vec() } else { vec![cmd] };
    let mut report = Report::default();
    for c in cmds {
        report.sections.push((c.name(), run_one(c, cfg)?));
    }
    Ok(report)
}

/// Emit a report; for CSV with several sections the quantity is prefixed by
/// its section.
pub fn write_report(out: &mut dyn std::io::Write, format: Format, report: &Report) -> Result<(), CliError> {
    match (format, report.sections.as_slice()) {
        (Format::Csv, [(name, rows)]) => output::write_rows(out, format, name, rows),
        (Format::Csv, _) => {
            let rows: Vec<Row> = report
                .rows()
                .map(|(s, r)| Row { quantity: format!("{s}/{}", r.quantity), ..r.clone() })
                .collect();
            output::write_rows(out, format, "verify-all", &rows)
        }
        (Format::Json, sections) => {
            for (name, rows) in sections {
                output::write_rows(out, format, name, rows)?;
            }
            Ok(())
        }
    }
}

/// One failure record per section that has failing rows.
pub fn failure_records(report: &Report) -> Vec<serde_json::Value> {
    report
        .sections
        .iter()
        .filter(|(_, rows)| rows.iter().any(|r| !r.pass))
        .map(|(name, rows)| output::failure_record(name, rows))
        .collect()
}
