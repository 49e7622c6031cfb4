//! Orchestration behind the `qclab` binary.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod report;

pub use config::{Command, RunConfig};
pub use output::emit_outputs;
pub use pipeline::{run_pipeline, Run};
pub use report::Report;
