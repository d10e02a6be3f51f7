//! Command-line front end for the `kaondyn` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod error;

pub use args::{Cli, Command, GlobalOpts, Mode};
pub use error::CliError;
