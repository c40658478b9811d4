//! Command-line surface: configuration, execution and file output.

pub mod config;
pub mod output;
pub mod run;
