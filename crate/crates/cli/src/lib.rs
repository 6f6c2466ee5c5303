//! Scenario runner for the `wnd` binary: configuration, scenario execution and
//! CSV output.

pub mod config;
pub mod report;
pub mod scenario;

pub use config::{ConfigError, ScenarioConfig, ScenarioKind};
pub use scenario::{run_scenario, ScenarioError, ScenarioOutput};
