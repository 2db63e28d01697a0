use std::collections::{HashMap, HashSet};

use crate::world::{RobotId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    /// Robot may not occupy the vertex at the timestep.
    Vertex(VertexId),
    /// Robot may not move `from -> to` arriving at the timestep.
    Edge { from: VertexId, to: VertexId },
}

/// A prohibition handed to the low-level search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceTimeConstraint {
    pub robot: RobotId,
    pub kind: ConstraintKind,
    pub timestep: usize,
}

impl SpaceTimeConstraint {
    pub fn vertex(robot: RobotId, v: VertexId, timestep: usize) -> Self {
        Self {
            robot,
            kind: ConstraintKind::Vertex(v),
            timestep,
        }
    }

    pub fn edge(robot: RobotId, from: VertexId, to: VertexId, timestep: usize) -> Self {
        Self {
            robot,
            kind: ConstraintKind::Edge { from, to },
            timestep,
        }
    }
}

/// Constraints of a single robot indexed for O(1) lookup.
#[derive(Debug, Clone, Default)]
pub(crate) struct ConstraintTable {
    vertices: HashSet<(VertexId, usize)>,
    edges: HashSet<(VertexId, VertexId, usize)>,
    last_at_vertex: HashMap<VertexId, usize>,
    /// Largest timestep of any constraint.
    pub latest: usize,
}

impl ConstraintTable {
    pub fn new<'a>(constraints: impl IntoIterator<Item = &'a SpaceTimeConstraint>) -> Self {
        let mut table = Self::default();
        for c in constraints {
            table.latest = table.latest.max(c.timestep);
            match c.kind {
                ConstraintKind::Vertex(v) => {
                    table.vertices.insert((v, c.timestep));
                    let last = table.last_at_vertex.entry(v).or_insert(0);
                    *last = (*last).max(c.timestep);
                }
                ConstraintKind::Edge { from, to } => {
                    table.edges.insert((from, to, c.timestep));
                }
            }
        }
        table
    }

    pub fn allows(&self, from: VertexId, to: VertexId, arrival: usize) -> bool {
        !self.vertices.contains(&(to, arrival))
            && (from == to || !self.edges.contains(&(from, to, arrival)))
    }

    /// Whether the robot may stop at `v` from timestep `t` onward.
    pub fn can_rest(&self, v: VertexId, t: usize) -> bool {
        self.last_at_vertex.get(&v).is_none_or(|&last| last < t)
    }
}
