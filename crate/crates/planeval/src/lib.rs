//! Datasets, agent harness and reports on top of `planeval-core`.
//!
//! * [`format`]: instance files, fitness banks and dataset manifests.
//! * [`client`]: chat-completion client with retries and pacing.
//! * [`prompt`] and [`parse`]: prompt templates and answer extraction.
//! * [`config`], [`harness`] and [`record`]: configured runs producing JSONL records.
//! * [`report`]: aggregate tables over records.

pub mod client;
pub mod config;
mod error;
pub mod format;
pub mod harness;
pub mod parse;
pub mod prompt;
pub mod record;
pub mod report;

pub use error::{Error, Result};
