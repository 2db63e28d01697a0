//! Discrete multi-robot planners: optimal conflict-tree search, its
//! bounded-suboptimal focal variant, and highway-biased planning.

mod astar;
mod cbs;
mod constraint;
mod ecbs;
mod highway;
mod joint;
mod reach;

use std::time::{Duration, Instant};

pub use astar::{space_time_astar, CostModel, Path};
pub use cbs::{plan_cbs, plan_cbs_with};
pub use constraint::{ConstraintKind, SpaceTimeConstraint};
pub use ecbs::{plan_ecbs, plan_ecbs_with};
pub use highway::{suggest_highways, HighwaySet};

pub(crate) use astar::{focal_search, search, Reservations};
pub(crate) use constraint::ConstraintTable;
pub(crate) use joint::joint_plan;
pub(crate) use reach::joint_reachable;

use crate::scalar::Scalar;
use crate::world::{
    rotation_cycles, Conflict, ConflictKind, DiscretePlan, MapfInstance, RobotId, VertexId,
    Violation, WorldError,
};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("no collision-free plan exists within the horizon")]
    Infeasible,
    #[error("planning exceeded its time or node budget")]
    Timeout,
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Makespan,
    Flowtime,
}

impl Objective {
    pub fn aggregate(self, costs: impl IntoIterator<Item = usize>) -> usize {
        match self {
            Objective::Makespan => costs.into_iter().max().unwrap_or(0),
            Objective::Flowtime => costs.into_iter().sum(),
        }
    }
}

/// Suboptimality factor `w >= 1` for focal search.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SuboptimalityBound(f64);

impl SuboptimalityBound {
    pub const OPTIMAL: Self = Self(1.0);

    pub fn new(w: f64) -> Result<Self, PlanError> {
        if w.is_finite() && w >= 1.0 {
            Ok(Self(w))
        } else {
            Err(PlanError::InvalidInput(format!(
                "suboptimality bound {w} must be >= 1"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Largest integer cost within `w * lower`.
    pub(crate) fn scale(self, lower: usize) -> usize {
        (self.0 * lower as f64 + 1e-9).floor() as usize
    }
}

/// Wall-clock and node budgets. Exceeding either yields [`PlanError::Timeout`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchLimits {
    pub timeout: Option<Duration>,
    pub max_nodes: Option<usize>,
}

impl SearchLimits {
    pub fn with_timeout(timeout: Duration) -> Self {
        Self {
            timeout: Some(timeout),
            max_nodes: None,
        }
    }
}

pub(crate) struct Budget {
    deadline: Option<Instant>,
    max_nodes: Option<usize>,
    nodes: usize,
}

impl Budget {
    pub fn new(limits: &SearchLimits) -> Self {
        Self {
            deadline: limits.timeout.map(|d| Instant::now() + d),
            max_nodes: limits.max_nodes,
            nodes: 0,
        }
    }

    pub fn tick(&mut self) -> Result<(), PlanError> {
        self.nodes += 1;
        if self.max_nodes.is_some_and(|m| self.nodes > m) {
            return Err(PlanError::Timeout);
        }
        if self.nodes.is_multiple_of(64) && self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(PlanError::Timeout);
        }
        Ok(())
    }
}

/// Timestep cap for complete search: `|V| * robots + makespan lower bound`.
pub fn horizon<S: Scalar>(instance: &MapfInstance<S>) -> usize {
    let lower = instance
        .robots
        .iter()
        .map(|r| instance.graph.hop_distances(r.start)[r.target.0])
        .filter(|&d| d != usize::MAX)
        .max()
        .unwrap_or(0);
    instance.graph.num_vertices() * instance.num_robots() + lower
}

/// Joint configurations explored when screening for unreachable targets.
pub(crate) const REACH_WORK: usize = 2_000_000;

/// Conflict-tree expansions after which a stalled search merges every robot
/// into one agent.
pub(crate) const MERGE_AFTER: usize = 256;
/// Joint configurations the merged search may store.
pub(crate) const JOINT_STATES: usize = 500_000;

/// Optimal plan of the fully merged instance, or `None` if its joint space is
/// too large to search.
pub(crate) fn merged_plan<S: Scalar>(
    instance: &MapfInstance<S>,
    objective: Objective,
    budget: &mut Budget,
) -> Result<Option<DiscretePlan>, PlanError> {
    let space = (instance.graph.num_vertices() as f64).powi(instance.num_robots() as i32);
    if space > 16.0 * JOINT_STATES as f64 {
        return Ok(None);
    }
    let groups: Vec<_> = instance
        .robots
        .iter()
        .map(|r| (vec![r.start], vec![r.target]))
        .collect();
    let paths = joint_plan(&instance.graph, &groups, objective, JOINT_STATES, budget)?;
    Ok(paths.map(DiscretePlan::new))
}

pub(crate) fn check_instance<S: Scalar>(instance: &MapfInstance<S>) -> Result<(), PlanError> {
    let v = instance.violations();
    if !v.is_empty() {
        return Err(PlanError::InvalidInstance(v));
    }
    let groups: Vec<_> = instance
        .robots
        .iter()
        .map(|r| (vec![r.start], vec![r.target]))
        .collect();
    if joint_reachable(&instance.graph, &groups, REACH_WORK) == Some(false) {
        return Err(PlanError::Infeasible);
    }
    Ok(())
}

/// The constraints a conflict branches on, one per involved robot.
pub(crate) fn branch(conflict: &Conflict, paths: &[Vec<VertexId>]) -> Vec<SpaceTimeConstraint> {
    let (a, b) = conflict.robots;
    let t = conflict.timestep;
    match conflict.kind {
        ConflictKind::Vertex(v) => vec![
            SpaceTimeConstraint::vertex(a, v, t),
            SpaceTimeConstraint::vertex(b, v, t),
        ],
        ConflictKind::Edge { from, to } => vec![
            SpaceTimeConstraint::edge(a, from, to, t),
            SpaceTimeConstraint::edge(b, to, from, t),
        ],
        ConflictKind::Cycle { .. } => cycle_moves(paths, t, a.0)
            .into_iter()
            .map(|(r, from, to)| SpaceTimeConstraint::edge(RobotId(r), from, to, t))
            .collect(),
    }
}

/// Members of the rotation through `robot` completing at `t`, with the move
/// each makes.
pub(crate) fn cycle_moves(
    paths: &[Vec<VertexId>],
    t: usize,
    robot: usize,
) -> Vec<(usize, VertexId, VertexId)> {
    let at = |r: usize, t: usize| paths[r][t.min(paths[r].len() - 1)];
    let prev: Vec<VertexId> = (0..paths.len()).map(|r| at(r, t - 1)).collect();
    let next: Vec<VertexId> = (0..paths.len()).map(|r| at(r, t)).collect();
    rotation_cycles(&prev, &next)
        .into_iter()
        .find(|c| c.contains(&robot))
        .map(|c| c.into_iter().map(|r| (r, prev[r], next[r])).collect())
        .unwrap_or_default()
}

pub(crate) fn constraints_of(
    all: &[SpaceTimeConstraint],
    robot: RobotId,
) -> Vec<SpaceTimeConstraint> {
    all.iter().filter(|c| c.robot == robot).copied().collect()
}
