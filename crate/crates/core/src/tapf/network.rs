use std::collections::BTreeSet;

use super::flow::MinCostFlow;
use crate::mapf::PlanError;
use crate::scalar::Scalar;
use crate::world::{Graph, Team, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TeamConstraintKind {
    Vertex(VertexId),
    /// No team robot moves `from -> to` arriving at the timestep.
    Edge {
        from: VertexId,
        to: VertexId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeamConstraint {
    pub kind: TeamConstraintKind,
    pub timestep: usize,
}

/// Prohibitions applied to every robot of one team.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeamConstraintSet {
    items: BTreeSet<TeamConstraint>,
}

impl TeamConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: TeamConstraint) -> bool {
        self.items.insert(c)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn forbids_vertex(&self, v: VertexId, t: usize) -> bool {
        self.items.contains(&TeamConstraint {
            kind: TeamConstraintKind::Vertex(v),
            timestep: t,
        })
    }

    pub fn forbids_move(&self, from: VertexId, to: VertexId, t: usize) -> bool {
        self.items.contains(&TeamConstraint {
            kind: TeamConstraintKind::Edge { from, to },
            timestep: t,
        })
    }
}

/// Unit-capacity time-expanded network for one team over `0..=horizon`.
///
/// Each `(vertex, t)` is split into an in/out pair joined by a capacity-1
/// arc. Each edge and step gets a gadget with a single capacity-1 internal
/// arc that both directions must share, which rules out swaps. Movement
/// arcs cost 1, waits cost 0.
pub struct TimeExpandedNetwork {
    flow: MinCostFlow,
    vertices: usize,
    horizon: usize,
    source: usize,
    sink: usize,
    /// Forward arc `out(v, t) -> in(v, t + 1)` per `(t, v)`.
    waits: Vec<Option<usize>>,
    /// Gadget exits `gadget(e, t) -> in(end, t + 1)` per `(t, e)`: `[to u, to v]`.
    exits: Vec<[usize; 2]>,
    /// Gadget entries `out(end, t) -> gadget(e, t)` per `(t, e)`: `[from u, from v]`.
    entries: Vec<[Option<usize>; 2]>,
    edge_ends: Vec<(VertexId, VertexId)>,
    incident: Vec<Vec<usize>>,
}

impl TimeExpandedNetwork {
    pub fn build<S: Scalar>(
        graph: &Graph<S>,
        team: &Team,
        horizon: usize,
        constraints: &TeamConstraintSet,
    ) -> Self {
        let nv = graph.num_vertices();
        let ne = graph.num_edges();
        let node_in = |v: usize, t: usize| 2 * (t * nv + v);
        let node_out = |v: usize, t: usize| 2 * (t * nv + v) + 1;
        let gadget_base = 2 * nv * (horizon + 1);
        let gadget_in = |e: usize, t: usize| gadget_base + 2 * (t * ne + e);
        let source = gadget_base + 2 * ne * horizon;
        let sink = source + 1;
        let mut flow = MinCostFlow::new(sink + 1);

        for t in 0..=horizon {
            for v in 0..nv {
                if !constraints.forbids_vertex(VertexId(v), t) {
                    flow.add_arc(node_in(v, t), node_out(v, t), 1, 0);
                }
            }
        }
        let mut waits = vec![None; nv * horizon];
        let mut exits = Vec::with_capacity(ne * horizon);
        let mut entries = Vec::with_capacity(ne * horizon);
        for t in 0..horizon {
            for v in 0..nv {
                waits[t * nv + v] = Some(flow.add_arc(node_out(v, t), node_in(v, t + 1), 1, 0));
            }
            for (e, edge) in graph.edges().iter().enumerate() {
                let (u, v) = (edge.u.0, edge.v.0);
                let g = gadget_in(e, t);
                let from_u = (!constraints.forbids_move(edge.u, edge.v, t + 1))
                    .then(|| flow.add_arc(node_out(u, t), g, 1, 0));
                let from_v = (!constraints.forbids_move(edge.v, edge.u, t + 1))
                    .then(|| flow.add_arc(node_out(v, t), g, 1, 0));
                flow.add_arc(g, g + 1, 1, 0);
                let to_u = flow.add_arc(g + 1, node_in(u, t + 1), 1, 1);
                let to_v = flow.add_arc(g + 1, node_in(v, t + 1), 1, 1);
                exits.push([to_u, to_v]);
                entries.push([from_u, from_v]);
            }
        }
        for s in &team.starts {
            flow.add_arc(source, node_in(s.0, 0), 1, 0);
        }
        for g in &team.targets {
            flow.add_arc(node_out(g.0, horizon), sink, 1, 0);
        }
        Self {
            flow,
            vertices: nv,
            horizon,
            source,
            sink,
            waits,
            exits,
            entries,
            edge_ends: graph.edges().iter().map(|e| (e.u, e.v)).collect(),
            incident: graph
                .vertices()
                .map(|v| graph.neighbors(v).iter().map(|&(_, e)| e).collect())
                .collect(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.flow.num_nodes()
    }

    /// Route `units` of flow; returns the amount routed.
    pub fn solve(&mut self, units: usize) -> usize {
        self.flow.run(self.source, self.sink, units as i64).0 as usize
    }

    /// Decompose the routed flow into one path per start. Each `(vertex,
    /// t)` carries at most one unit and each gadget at most one, so the
    /// successor of every occupied state is unique.
    pub fn paths(&self, starts: &[VertexId]) -> Vec<Vec<VertexId>> {
        let nv = self.vertices;
        let ne = self.edge_ends.len();
        starts
            .iter()
            .map(|&s| {
                let mut path = vec![s];
                let mut v = s;
                for t in 0..self.horizon {
                    let next = if self.waits[t * nv + v.0].is_some_and(|a| self.flow.flow(a) > 0) {
                        v
                    } else {
                        self.incident[v.0]
                            .iter()
                            .find_map(|&e| {
                                let (a, b) = self.edge_ends[e];
                                let side = if a == v {
                                    0
                                } else if b == v {
                                    1
                                } else {
                                    return None;
                                };
                                let entry = self.entries[t * ne + e][side]?;
                                if self.flow.flow(entry) == 0 {
                                    return None;
                                }
                                let [to_a, _] = self.exits[t * ne + e];
                                Some(if self.flow.flow(to_a) > 0 { a } else { b })
                            })
                            .expect("flow conservation")
                    };
                    path.push(next);
                    v = next;
                }
                path
            })
            .collect()
    }
}

/// Collision-free paths for one team that all end on distinct team targets
/// at exactly `horizon`. Which robot takes which target is decided by the
/// flow.
pub fn plan_team_flow<S: Scalar>(
    graph: &Graph<S>,
    team: &Team,
    horizon: usize,
    constraints: &TeamConstraintSet,
) -> Result<Vec<Vec<VertexId>>, PlanError> {
    if team.starts.len() != team.targets.len() {
        return Err(PlanError::InvalidInput(
            "team has unequal starts and targets".into(),
        ));
    }
    let mut net = TimeExpandedNetwork::build(graph, team, horizon, constraints);
    if net.solve(team.len()) < team.len() {
        return Err(PlanError::Infeasible);
    }
    Ok(net.paths(&team.starts))
}
