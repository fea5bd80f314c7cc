//! Configuration, orchestration and report emission for `harmext`.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{JobConfig, Stage};
pub use error::CliError;
pub use pipeline::{run, RunOutcome, RunReport};
