use super::{Graph, RobotId, VertexId, WorldError};
use crate::scalar::Scalar;

/// Per-robot vertex sequences on unit timesteps.
///
/// Paths are stored without trailing waits; a robot stays at its last vertex
/// forever after its path ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscretePlan {
    paths: Vec<Vec<VertexId>>,
}

impl DiscretePlan {
    pub fn new(paths: Vec<Vec<VertexId>>) -> Self {
        let paths = paths
            .into_iter()
            .map(|mut p| {
                while p.len() > 1 && p[p.len() - 1] == p[p.len() - 2] {
                    p.pop();
                }
                p
            })
            .collect();
        Self { paths }
    }

    pub fn num_robots(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[Vec<VertexId>] {
        &self.paths
    }

    pub fn path(&self, robot: RobotId) -> &[VertexId] {
        &self.paths[robot.0]
    }

    /// Vertex of `robot` at `t`, holding the last vertex after the path ends.
    pub fn at(&self, robot: RobotId, t: usize) -> VertexId {
        let p = &self.paths[robot.0];
        p[t.min(p.len() - 1)]
    }

    /// Timestep at which a robot last moves (0 if it never moves).
    pub fn arrival(&self, robot: RobotId) -> usize {
        self.paths[robot.0].len().saturating_sub(1)
    }

    pub fn makespan(&self) -> usize {
        (0..self.paths.len())
            .map(|r| self.arrival(RobotId(r)))
            .max()
            .unwrap_or(0)
    }

    pub fn flowtime(&self) -> usize {
        (0..self.paths.len())
            .map(|r| self.arrival(RobotId(r)))
            .sum()
    }

    /// Paths padded with waits to a common length `makespan + 1`.
    pub fn padded(&self) -> Vec<Vec<VertexId>> {
        let t = self.makespan();
        (0..self.paths.len())
            .map(|r| (0..=t).map(|i| self.at(RobotId(r), i)).collect())
            .collect()
    }

    /// Every consecutive pair is a wait or an edge of `graph`.
    pub fn check_moves<S: Scalar>(&self, graph: &Graph<S>) -> Result<(), WorldError> {
        for (r, path) in self.paths.iter().enumerate() {
            if path.is_empty() {
                return Err(WorldError::Plan(format!("robot {r} has an empty path")));
            }
            if let Some(v) = path.iter().find(|v| !graph.contains(**v)) {
                return Err(WorldError::Plan(format!(
                    "robot {r} visits missing vertex {v}"
                )));
            }
            for (t, w) in path.windows(2).enumerate() {
                if w[0] != w[1] && !graph.adjacent(w[0], w[1]) {
                    return Err(WorldError::Plan(format!(
                        "robot {r} jumps {} -> {} at timestep {}",
                        graph.name(w[0]),
                        graph.name(w[1]),
                        t + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Structural validity against the given starts and targets.
    pub fn check_endpoints(
        &self,
        starts: &[VertexId],
        targets: &[VertexId],
    ) -> Result<(), WorldError> {
        if self.paths.len() != starts.len() || self.paths.len() != targets.len() {
            return Err(WorldError::Plan(format!(
                "plan has {} robots, instance has {}",
                self.paths.len(),
                starts.len()
            )));
        }
        for (r, path) in self.paths.iter().enumerate() {
            if path.first() != Some(&starts[r]) {
                return Err(WorldError::Plan(format!(
                    "robot {r} does not begin at its start"
                )));
            }
            if path.last() != Some(&targets[r]) {
                return Err(WorldError::Plan(format!(
                    "robot {r} does not end at its target"
                )));
            }
        }
        Ok(())
    }
}
