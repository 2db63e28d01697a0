//! Library side of the `fleetplan` command: scenario files, the pipeline
//! stages, benchmarking and rendering.

pub mod bench;
pub mod commands;
pub mod exit;
pub mod render;
pub mod scenario;

pub use commands::Overrides;
pub use scenario::{Scenario, ScenarioFile};
