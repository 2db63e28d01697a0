//! Graphs, problem instances, discrete plans and the conflict checker.

mod conflict;
pub mod format;
mod graph;
mod grid;
mod instance;
mod plan;

pub use conflict::{
    count_conflicts, detect_conflicts, first_conflict, rotation_cycles, Conflict, ConflictKind,
};
pub use graph::{Edge, Graph, GraphBuilder, RobotId, VertexId};
pub use grid::{parse_grid_map, serialize_grid_map, GridMap};
pub use instance::{
    validate_instance, MapfInstance, Problem, RobotSpec, TapfInstance, Team, Violation,
};
pub use plan::DiscretePlan;

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid grid map: {0}")]
    Grid(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}
