//! Command-line front end: config ingestion, subcommands and report emission.

pub mod commands;
pub mod config;
pub mod report;
