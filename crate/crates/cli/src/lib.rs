//! Experiment runner library behind the `evoguide` binary: configuration
//! merging, CSV emission, run orchestration and multi-seed aggregation.

pub mod commands;
pub mod csvio;
pub mod opts;
pub mod runs;

pub use opts::Cli;
