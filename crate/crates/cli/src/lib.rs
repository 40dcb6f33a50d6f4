//! Command-line front end for `multiconf`: binomial intervals, level-set
//! regions, coverage and volume sweeps, and two worked examples.

pub mod cli;
pub mod commands;
pub mod error;
pub mod output;
pub mod worked;

pub use crate::error::CliError;
