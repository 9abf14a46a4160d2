//! Command-line layer for test-based Bayes factor model selection: TOML run
//! configuration, CSV ingestion, parallel pipelines and JSON/CSV reports.

pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use config::RunConfig;
pub use error::{AppError, AppResult};
pub use ingest::{ingest_csv, ingest_reader, Ingested};
pub use report::Report;

/// Subcommands that run on a configured dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Select,
    Sample,
    Validate,
}

/// Ingest the configured data and run `command`.
pub fn execute(command: Command, cfg: &RunConfig) -> AppResult<Report> {
    let ing = ingest_csv(&cfg.data.path, &cfg.data)?;
    execute_on(command, cfg, &ing)
}

pub fn execute_on(command: Command, cfg: &RunConfig, ing: &Ingested) -> AppResult<Report> {
    Ok(match command {
        Command::Select => report::select_report(cfg, ing, &run::run_select(cfg, ing)?),
        Command::Sample => report::sample_report(cfg, ing, &run::run_sample(cfg, ing)?),
        Command::Validate => report::validate_report(cfg, ing, &run::run_validate(cfg, ing)?),
    })
}
