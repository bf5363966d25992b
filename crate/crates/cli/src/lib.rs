//! Library half of the `crossclass` command-line tool: scenario file
//! parsing, CSV ingestion, report rendering, and the command implementations
//! that `main` dispatches to.

pub mod csvio;
pub mod fixtures;
pub mod ops;
pub mod report;
pub mod schema;

/// Errors carry their exit code: validation failures exit 1, computation
/// failures (inconsistent data, infeasible caps, oversized enumerations)
/// exit 2, bad invocations exit 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Computation(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) => 2,
            CliError::Usage(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Computation(m) => write!(f, "computation error: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
