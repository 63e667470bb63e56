//! File formats and subcommands of the `cqed` command-line tool.
//!
//! A run reads a scenario (a compiled-in preset or a text file, see
//! [`scenario`]), integrates the emitter dynamics, evaluates the outgoing
//! spectra and writes plain CSV/JSON artifacts plus a manifest with
//! checksums. Output is byte-for-byte reproducible.

pub mod commands;
mod error;
pub mod manifest;
pub mod output;
pub mod scenario;

pub use error::{CliError, Result};
