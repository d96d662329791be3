//! Batch front-end shared by the `semistab` binary: configs, the analysis pipeline and reports.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{Analysis, Format, RunConfig};
pub use pipeline::run;
pub use report::{Record, RunReport};
