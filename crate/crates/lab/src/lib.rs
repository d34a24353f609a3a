//! Seeded, reproducible batch runs over the checks in `prodset-core`.
//!
//! Every runner takes its section of an [`ExperimentConfig`], a seed and a
//! worker count, and returns a [`ResultRecord`] that does not depend on the
//! worker count.

pub mod config;
pub mod record;
pub mod runners;
pub mod trials;

pub use config::ExperimentConfig;
pub use record::{ResultRecord, Status, TrialOutcome, Verdict};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
