//! Command implementations behind the `mfgp` binary, split out so
//! integration tests can drive them directly.

pub mod commands;
pub mod manifest;
pub mod model_file;

pub use commands::{cmd_bench, cmd_predict, cmd_train, BenchArgs, CliError, PredictArgs, TrainArgs};
