//! Configuration-driven front end for `hypflow`.

pub mod commands;
pub mod config;
pub mod error;
pub mod init;

pub use commands::{cmd_compare_ode, cmd_run, cmd_sweep, cmd_validate_speed, thread_cap, Outcome};
pub use config::{RunConfig, SweepConfig};
pub use error::{exit, CliError};
