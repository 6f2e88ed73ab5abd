//! Command-line front end for `loglap-core`: config parsing, experiment
//! drivers and report files.
//!
//! Exit status: 0 success, 1 internal error, 2 invalid configuration,
//! 3 failed contraction certificate, 4 no convergence, 5 a check failed.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use loglap_core::spectral::Grid;

pub mod checks;
pub mod commands;
pub mod config;
pub mod output;

use commands::Outcome;
use config::{load_config, ConfigError, Setup};
use output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Internal,
    Config,
    CertificateFailed,
    NotConverged,
    CheckFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Internal => 1,
            Status::Config => 2,
            Status::CertificateFailed => 3,
            Status::NotConverged => 4,
            Status::CheckFailed => 5,
        }
    }

    /// Status for an error that escaped a command.
    pub fn of_error(err: &anyhow::Error) -> Self {
        if err.downcast_ref::<ConfigError>().is_some() {
            return Status::Config;
        }
        match err.downcast_ref::<loglap_core::Error>() {
            Some(
                loglap_core::Error::CertificateFailed(_)
                | loglap_core::Error::MemberCertificateFailed { .. }
                | loglap_core::Error::InadmissibleLimit { .. },
            ) => Status::CertificateFailed,
            _ => Status::Internal,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "loglap",
    version,
    about = "Certified fixed-point solver for logarithmic Laplacian equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Directory for report files.
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the contraction certificate.
    Certify(RunArgs),
    /// Certify, then run the Picard iteration.
    Solve(RunArgs),
    /// Solve along a kernel sequence and compare with the limit.
    Sequence(RunArgs),
    /// Run the property suite for a configuration.
    Verify(RunArgs),
    /// Transform self-tests; without a config, on d=1, L=20, n=1024.
    FtSelftest {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
}

fn setup(args: &RunArgs) -> anyhow::Result<Setup> {
    let cfg = load_config(&args.config)?;
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    Ok(cfg.build(&base)?)
}

fn dispatch(command: &Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Certify(a) => commands::cmd_certify(&setup(a)?, &OutputDir::create(&a.out)?),
        Command::Solve(a) => commands::cmd_solve(&setup(a)?, &OutputDir::create(&a.out)?),
        Command::Sequence(a) => commands::cmd_sequence(&setup(a)?, &OutputDir::create(&a.out)?),
        Command::Verify(a) => commands::cmd_verify(&setup(a)?, &OutputDir::create(&a.out)?),
        Command::FtSelftest { config, out } => {
            let (grid, seed) = match config {
                Some(path) => {
                    let cfg = load_config(path)?;
                    let g = &cfg.grid;
                    let grid = Grid::new(g.d, g.half_width, g.n)
                        .map_err(|e| ConfigError(format!("[grid]: {e}")))?;
                    (grid, cfg.solver.seed)
                }
                None => (Grid::new(1, 20.0, 1024)?, 0),
            };
            commands::cmd_ft_selftest(&grid, seed, &OutputDir::create(out)?)
        }
    }
}

/// Runs one command, printing its summary to stdout and errors to stderr.
pub fn run(cli: &Cli) -> Status {
    match dispatch(&cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.summary.render());
            outcome.status
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            Status::of_error(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let all = [
            Status::Success,
            Status::Internal,
            Status::Config,
            Status::CertificateFailed,
            Status::NotConverged,
            Status::CheckFailed,
        ];
        let mut codes: Vec<u8> = all.iter().map(|s| s.code()).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), all.len());
    }

    #[test]
    fn errors_map_to_their_status() {
        let config = anyhow::Error::new(ConfigError("bad".into()));
        assert_eq!(Status::of_error(&config), Status::Config);
        let member =
            anyhow::Error::new(loglap_core::Error::MemberCertificateFailed { m: 2, q: 1.5 });
        assert_eq!(Status::of_error(&member), Status::CertificateFailed);
        let blow_up = anyhow::Error::new(loglap_core::Error::BlowUp);
        assert_eq!(Status::of_error(&blow_up), Status::Internal);
    }
}
