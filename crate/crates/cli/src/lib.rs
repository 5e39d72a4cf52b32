//! File formats, reports and command implementations behind the `wignerlab` binary.

pub mod commands;
pub mod files;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
}
