//! Command-line front end: flag and config handling, the per-model
//! pipelines, and JSON/CSV export.

pub mod args;
pub mod output;
pub mod run;

use std::fmt;

/// Bad flags, config or option values. The binary exits with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
