use std::collections::{BTreeMap, BTreeSet};

use super::{space_time_astar, CostModel, PlanError};
use crate::scalar::Scalar;
use crate::world::{Graph, MapfInstance, VertexId};

/// Preferred travel directions on a subset of edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HighwaySet {
    directed: BTreeSet<(VertexId, VertexId)>,
}

impl HighwaySet {
    pub fn new<S: Scalar>(
        graph: &Graph<S>,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, PlanError> {
        let mut directed = BTreeSet::new();
        for (u, v) in pairs {
            if !graph.contains(u) || !graph.contains(v) || !graph.adjacent(u, v) {
                return Err(PlanError::InvalidInput(format!(
                    "highway {u}->{v} is not a graph edge"
                )));
            }
            if directed.contains(&(v, u)) {
                return Err(PlanError::InvalidInput(format!(
                    "highway {}->{} conflicts with its reverse",
                    graph.name(u),
                    graph.name(v)
                )));
            }
            directed.insert((u, v));
        }
        Ok(Self { directed })
    }

    pub fn is_empty(&self) -> bool {
        self.directed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.directed.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.directed.iter().copied()
    }

    pub fn contains(&self, from: VertexId, to: VertexId) -> bool {
        self.directed.contains(&(from, to))
    }

    /// Moving `from -> to` opposes a highway.
    pub fn opposes(&self, from: VertexId, to: VertexId) -> bool {
        self.directed.contains(&(to, from))
    }

    /// Every highway reversed.
    pub fn reversed(&self) -> Self {
        Self {
            directed: self.directed.iter().map(|&(u, v)| (v, u)).collect(),
        }
    }

    /// Fraction of moves in `paths` that follow a highway in its direction.
    pub fn usage(&self, paths: &[Vec<VertexId>]) -> f64 {
        let (mut along, mut total) = (0usize, 0usize);
        for p in paths {
            for w in p.windows(2) {
                if w[0] != w[1] {
                    total += 1;
                    if self.contains(w[0], w[1]) {
                        along += 1;
                    }
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            along as f64 / total as f64
        }
    }
}

/// Highways from the majority direction of independent shortest paths.
///
/// Each robot is routed alone; every edge those routes traverse gets the
/// direction used more often. Edges with tied counts are left out.
pub fn suggest_highways<S: Scalar>(instance: &MapfInstance<S>) -> Result<HighwaySet, PlanError> {
    let graph = &instance.graph;
    let mut counts: BTreeMap<(VertexId, VertexId), i64> = BTreeMap::new();
    for r in &instance.robots {
        let path = space_time_astar(
            graph,
            r.start,
            r.target,
            &[],
            &CostModel::Unit,
            graph.num_vertices(),
        )?;
        for w in path.vertices.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let (key, sign) = if w[0] < w[1] {
                ((w[0], w[1]), 1)
            } else {
                ((w[1], w[0]), -1)
            };
            *counts.entry(key).or_insert(0) += sign;
        }
    }
    let pairs = counts
        .into_iter()
        .filter_map(|((u, v), c)| match c.signum() {
            1 => Some((u, v)),
            -1 => Some((v, u)),
            _ => None,
        });
    HighwaySet::new(graph, pairs)
}
