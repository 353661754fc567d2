//! File formats, configuration and commands of the `blowuplab` tool.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;
pub mod snapshot;
pub mod table;
