//! Scenario runner and model catalogue behind the `sqmzoo` binary.

pub mod catalog;
pub mod scenario;

pub use catalog::{catalog, catalog_text, ModelEntry};
pub use scenario::{run_suite, Overrides, RunReport, Scenario};
