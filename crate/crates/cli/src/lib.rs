//! Configuration, dry-run validation and protocol runners behind the
//! `qiopa` command.

pub mod config;
pub mod run;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig, Flags, Mode, Protocol, StateKind};
pub use run::{run, RunError, RunReport};
pub use validate::{validate, Diagnostics, Verdict};
