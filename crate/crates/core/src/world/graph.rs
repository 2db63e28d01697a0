use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::scalar::{Point, Scalar};

/// Dense vertex index into a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

/// Robot index within a plan or instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RobotId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<S> {
    pub u: VertexId,
    pub v: VertexId,
    pub length: S,
    /// Optional speed cap on this edge, m/s.
    pub speed_limit: Option<S>,
}

impl<S> Edge<S> {
    pub fn other(&self, end: VertexId) -> VertexId {
        if end == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected graph with named, positioned vertices and weighted edges.
///
/// Immutable once built. Neighbor lists are sorted by vertex id so every
/// search that iterates them is deterministic.
#[derive(Debug, Clone)]
pub struct Graph<S> {
    names: Vec<String>,
    positions: Vec<Point<S>>,
    edges: Vec<Edge<S>>,
    adjacency: Vec<Vec<(VertexId, usize)>>,
    by_name: HashMap<String, VertexId>,
    edge_index: HashMap<(VertexId, VertexId), usize>,
}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder<S> {
    names: Vec<String>,
    positions: Vec<Point<S>>,
    edges: Vec<Edge<S>>,
}

impl<S: Scalar> GraphBuilder<S> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            positions: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn vertex(&mut self, name: impl Into<String>, x: S, y: S) -> VertexId {
        self.names.push(name.into());
        self.positions.push(Point::new(x, y));
        VertexId(self.names.len() - 1)
    }

    pub fn edge(&mut self, u: VertexId, v: VertexId, length: S) -> &mut Self {
        self.edges.push(Edge {
            u,
            v,
            length,
            speed_limit: None,
        });
        self
    }

    pub fn edge_with_limit(
        &mut self,
        u: VertexId,
        v: VertexId,
        length: S,
        limit: Option<S>,
    ) -> &mut Self {
        self.edges.push(Edge {
            u,
            v,
            length,
            speed_limit: limit,
        });
        self
    }

    /// Edge whose length is the Euclidean distance between its endpoints.
    pub fn straight_edge(&mut self, u: VertexId, v: VertexId) -> &mut Self {
        let length = self.positions[u.0].distance(&self.positions[v.0]);
        self.edge(u, v, length)
    }

    pub fn build(self) -> Result<Graph<S>, WorldError> {
        Graph::new(self.names, self.positions, self.edges)
    }
}

impl<S: Scalar> Graph<S> {
    pub fn new(
        names: Vec<String>,
        positions: Vec<Point<S>>,
        edges: Vec<Edge<S>>,
    ) -> Result<Self, WorldError> {
        if names.len() != positions.len() {
            return Err(WorldError::Graph(format!(
                "{} names for {} positions",
                names.len(),
                positions.len()
            )));
        }
        let n = names.len();
        let mut by_name = HashMap::with_capacity(n);
        for (i, (name, p)) in names.iter().zip(&positions).enumerate() {
            if !p.is_finite() {
                return Err(WorldError::Graph(format!(
                    "vertex {name} has a non-finite position"
                )));
            }
            if by_name.insert(name.clone(), VertexId(i)).is_some() {
                return Err(WorldError::Graph(format!("duplicate vertex name {name}")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_index = HashMap::with_capacity(edges.len() * 2);
        for (i, e) in edges.iter().enumerate() {
            if e.u.0 >= n || e.v.0 >= n {
                return Err(WorldError::Graph(format!(
                    "edge {i} references a missing vertex"
                )));
            }
            if e.u == e.v {
                return Err(WorldError::Graph(format!(
                    "edge {i} is a self-loop at {}",
                    names[e.u.0]
                )));
            }
            if !(e.length > S::zero()) || !e.length.is_finite() {
                return Err(WorldError::Graph(format!(
                    "edge {}-{} has non-positive length",
                    names[e.u.0], names[e.v.0]
                )));
            }
            if let Some(limit) = e.speed_limit {
                if !(limit > S::zero()) {
                    return Err(WorldError::Graph(format!(
                        "edge {}-{} has a non-positive speed limit",
                        names[e.u.0], names[e.v.0]
                    )));
                }
            }
            if edge_index.insert((e.u, e.v), i).is_some()
                || edge_index.insert((e.v, e.u), i).is_some()
            {
                return Err(WorldError::Graph(format!(
                    "duplicate edge {}-{}",
                    names[e.u.0], names[e.v.0]
                )));
            }
            adjacency[e.u.0].push((e.v, i));
            adjacency[e.v.0].push((e.u, i));
        }
        for list in &mut adjacency {
            list.sort();
        }
        Ok(Self {
            names,
            positions,
            edges,
            adjacency,
            by_name,
            edge_index,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.names.len()).map(VertexId)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 < self.names.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn position(&self, v: VertexId) -> Point<S> {
        self.positions[v.0]
    }

    pub fn lookup(&self, name: &str) -> Option<VertexId> {
        self.by_name.get(name).copied()
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge<S> {
        &self.edges[idx]
    }

    /// Neighbors of `v` with the connecting edge index, sorted by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, usize)] {
        &self.adjacency[v.0]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.edge_index.get(&(u, v)).copied()
    }

    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_index.contains_key(&(u, v))
    }

    pub fn min_edge_length(&self) -> Option<S> {
        self.edges.iter().map(|e| e.length).reduce(S::min)
    }

    /// Unit-cost hop distances from `source` (BFS); `usize::MAX` if unreachable.
    pub fn hop_distances(&self, source: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = std::collections::VecDeque::new();
        dist[source.0] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in self.neighbors(u) {
                if dist[w.0] == usize::MAX {
                    dist[w.0] = dist[u.0] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
