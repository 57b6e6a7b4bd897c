//! Experiment harness around `rqi-core`: builds problem instances per
//! command, fans trials out across worker threads and exports CSV or JSON.

pub mod args;
pub mod error;
pub mod output;
pub mod run;
pub mod workers;

pub use error::BenchError;
pub use run::{execute, Status};
