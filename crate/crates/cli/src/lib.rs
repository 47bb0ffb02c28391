//! Command-line layer over the `radiomics` library: feature tables, run
//! manifests, repeatability report files and Bland-Altman SVG plots.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod report_io;
pub mod svg;
pub mod table;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RADIOMICS_THREADS";

/// Sizes the global thread pool from `RADIOMICS_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::compute(e.to_string()))
}
