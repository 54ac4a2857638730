//! Configuration, command dispatch and report rendering for `affinity-dim`.

pub mod commands;
pub mod config;
pub mod render;
pub mod report;

pub use commands::{run, Command, Overrides};
pub use config::ProblemConfig;
pub use render::{render, Format};
pub use report::ReportDocument;
