//! Command-line front end: configuration files, subcommands, and the CSV,
//! JSON and manifest artifacts they write.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Which;
use crate::config::Config;
use crate::output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0:#}")]
    Config(anyhow::Error),
    #[error("solver failure: {0:#}")]
    Solver(anyhow::Error),
    #[error("bound violation: {0:#}")]
    Violation(anyhow::Error),
    #[error("i/o error: {0:#}")]
    Io(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
            CliError::Violation(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nonlocal", version, about = "Memory-equation solver and bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// TOML or JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the profile constants.
    Constants(Common),
    /// Solve the memory equation at the configured h.
    RunMemory(Common),
    /// Solve the limit equation.
    RunLimit(Common),
    /// Convergence study in h with all bound reports.
    Study(StudyArgs),
    /// As `study`, exiting with 4 on a bound violation.
    Check(StudyArgs),
}

#[derive(Debug, clap::Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Descending list `a,b,c`; overrides `h_list` in the config.
    #[arg(long, value_delimiter = ',')]
    pub h_list: Option<Vec<f64>>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let load = |c: &Common| Config::load(&c.config).map_err(CliError::Config);
    match cli.command {
        Command::Constants(c) => commands::cmd_constants(&load(&c)?, &c.out, c.format).map(drop),
        Command::RunMemory(c) => commands::cmd_run(&load(&c)?, Which::Memory, &c.out, c.format).map(drop),
        Command::RunLimit(c) => commands::cmd_run(&load(&c)?, Which::Limit, &c.out, c.format).map(drop),
        Command::Study(s) => {
            let config = load(&s.common)?;
            let h_list = config.resolve_h_list(s.h_list.as_deref());
            commands::cmd_study(&config, &h_list, &s.common.out, s.common.format, "study").map(drop)
        }
        Command::Check(s) => {
            let config = load(&s.common)?;
            let h_list = config.resolve_h_list(s.h_list.as_deref());
            commands::cmd_check(&config, &h_list, &s.common.out, s.common.format).map(drop)
        }
    }
}
