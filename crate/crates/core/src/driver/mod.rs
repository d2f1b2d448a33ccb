//! Configuration, scenario orchestration, persistence and output.

pub mod checkpoint;
pub mod config;
pub mod plot;
pub mod scenario;
pub mod sweep;

pub use checkpoint::Checkpoint;
pub use config::{parse_config, FlowConfig, Scenario};
pub use scenario::{run_scenario, Checks, RunStatus, ScenarioResult};
pub use sweep::{sweep, SweepRow};
