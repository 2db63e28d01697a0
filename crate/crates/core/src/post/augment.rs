use super::tpg::{ArcKind, Tpg};
use super::PostError;
use crate::scalar::{Point, Scalar};
use crate::world::{Graph, RobotId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Arrival at a plan vertex.
    Arrival(VertexId),
    /// The robot is `delta` past the tail of its current edge.
    Cleared(VertexId),
    /// The robot is within `delta` of the head of its current edge.
    Approach(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugNode<S: Scalar> {
    pub robot: RobotId,
    pub kind: EventKind,
    pub position: Point<S>,
    /// Plan timestep of the underlying arrival, or of the traversal's tail.
    pub timestep: usize,
}

/// Arc of the augmented graph. Intra arcs cover `length` meters of `edge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugArc<S: Scalar> {
    pub from: usize,
    pub to: usize,
    pub kind: ArcKind,
    pub length: S,
    pub edge: Option<usize>,
}

/// A TPG with safety-distance markers.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTpg<S: Scalar> {
    delta: S,
    nodes: Vec<AugNode<S>>,
    arcs: Vec<AugArc<S>>,
    chains: Vec<Vec<usize>>,
}

impl<S: Scalar> AugmentedTpg<S> {
    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn nodes(&self) -> &[AugNode<S>] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[AugArc<S>] {
        &self.arcs
    }

    pub fn num_robots(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, robot: RobotId) -> &[usize] {
        &self.chains[robot.0]
    }

    pub fn is_acyclic(&self) -> bool {
        super::tpg::topological_order(self.nodes.len(), self.arcs.iter().map(|a| (a.from, a.to)))
            .is_some()
    }
}

/// Edges that carry markers: the departure edge of every predecessor and the
/// arrival edge of every successor of an inter-robot arc.
pub fn marked_edges<S: Scalar>(tpg: &Tpg, graph: &Graph<S>) -> Vec<usize> {
    let mut edges: Vec<usize> = marked_traversals(tpg)
        .into_iter()
        .map(|(r, i, _)| traversal_edge(tpg, graph, r, i))
        .collect();
    edges.sort();
    edges.dedup();
    edges
}

/// `(robot, traversal index, is_cleared)` for every marker.
fn marked_traversals(tpg: &Tpg) -> Vec<(usize, usize, bool)> {
    let index_of = |n: usize| {
        let r = tpg.nodes()[n].robot;
        (
            r.0,
            tpg.chain(r)
                .iter()
                .position(|&m| m == n)
                .expect("node in chain"),
        )
    };
    let mut out = Vec::new();
    for arc in tpg.inter_arcs() {
        let (j, ji) = index_of(arc.from);
        let (k, ki) = index_of(arc.to);
        // A predecessor parked at its next vertex has no outgoing edge; its
        // arrival there stands in for the marker.
        if ji + 1 < tpg.chain(RobotId(j)).len() {
            out.push((j, ji, true));
        }
        out.push((k, ki - 1, false));
    }
    out
}

fn traversal_edge<S: Scalar>(tpg: &Tpg, graph: &Graph<S>, robot: usize, i: usize) -> usize {
    let chain = tpg.chain(RobotId(robot));
    let u = tpg.nodes()[chain[i]].location;
    let v = tpg.nodes()[chain[i + 1]].location;
    graph.edge_between(u, v).expect("plan moves along edges")
}

/// Insert safety markers at arc-length `delta` around every shared vertex.
///
/// An inter-robot arc runs from the predecessor's arrival at the vertex after
/// `l` to the successor's arrival at `l`. It is rerouted to start `delta`
/// further along the predecessor's path and to end `delta` earlier along the
/// successor's. With `delta = 0` the TPG is returned unchanged.
pub fn augment_tpg<S: Scalar>(
    tpg: &Tpg,
    delta: S,
    graph: &Graph<S>,
) -> Result<AugmentedTpg<S>, PostError> {
    if !(delta >= S::zero()) || !delta.is_finite() {
        return Err(PostError::InvalidDelta(delta.as_f64()));
    }
    let robots = tpg.num_robots();
    let mut cleared = vec![Vec::new(); robots];
    let mut approach = vec![Vec::new(); robots];
    for r in 0..robots {
        let hops = tpg.chain(RobotId(r)).len().saturating_sub(1);
        cleared[r] = vec![false; hops];
        approach[r] = vec![false; hops];
    }
    if delta > S::zero() {
        for (r, i, is_cleared) in marked_traversals(tpg) {
            let e = graph.edge(traversal_edge(tpg, graph, r, i));
            if delta > e.length * S::half() {
                return Err(PostError::DeltaTooLarge {
                    delta: delta.as_f64(),
                    length: e.length.as_f64(),
                    from: graph.name(e.u).to_string(),
                    to: graph.name(e.v).to_string(),
                });
            }
            if is_cleared {
                cleared[r][i] = true;
            } else {
                approach[r][i] = true;
            }
        }
    }

    let mut nodes = Vec::new();
    let mut arcs = Vec::new();
    let mut chains = Vec::with_capacity(robots);
    // Maps (robot, traversal) to marker node ids.
    let mut cleared_id = vec![Vec::new(); robots];
    let mut approach_id = vec![Vec::new(); robots];
    // Maps TPG node to augmented node.
    let mut arrival_id = vec![usize::MAX; tpg.nodes().len()];
    for r in 0..robots {
        let chain = tpg.chain(RobotId(r));
        let mut out = Vec::new();
        let mut push = |nodes: &mut Vec<AugNode<S>>, node: AugNode<S>| {
            out.push(nodes.len());
            nodes.push(node);
            nodes.len() - 1
        };
        cleared_id[r] = vec![usize::MAX; chain.len().saturating_sub(1)];
        approach_id[r] = vec![usize::MAX; chain.len().saturating_sub(1)];
        for (i, &n) in chain.iter().enumerate() {
            let tn = tpg.nodes()[n];
            let p = graph.position(tn.location);
            arrival_id[n] = push(
                &mut nodes,
                AugNode {
                    robot: tn.robot,
                    kind: EventKind::Arrival(tn.location),
                    position: p,
                    timestep: tn.timestep,
                },
            );
            let Some(&next) = chain.get(i + 1) else { break };
            let w = tpg.nodes()[next].location;
            let e = graph.edge(
                graph
                    .edge_between(tn.location, w)
                    .expect("plan moves along edges"),
            );
            let q = graph.position(w);
            let at = |s: S| p.lerp(&q, s / e.length);
            if cleared[r][i] {
                cleared_id[r][i] = push(
                    &mut nodes,
                    AugNode {
                        robot: tn.robot,
                        kind: EventKind::Cleared(tn.location),
                        position: at(delta),
                        timestep: tn.timestep,
                    },
                );
            }
            if approach[r][i] {
                approach_id[r][i] = push(
                    &mut nodes,
                    AugNode {
                        robot: tn.robot,
                        kind: EventKind::Approach(w),
                        position: at(e.length - delta),
                        timestep: tn.timestep,
                    },
                );
            }
        }
        // Intra arcs with the arc-length each one covers.
        let mut offset = S::zero();
        let mut hop = 0;
        for pair in out.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let u = tpg.nodes()[chain[hop]].location;
            let w = tpg.nodes()[chain[hop + 1]].location;
            let edge = graph.edge_between(u, w).expect("plan moves along edges");
            let len = graph.edge(edge).length;
            let end = match nodes[b].kind {
                EventKind::Arrival(_) => len,
                EventKind::Cleared(_) => delta,
                EventKind::Approach(_) => len - delta,
            };
            arcs.push(AugArc {
                from: a,
                to: b,
                kind: ArcKind::Intra,
                length: (end - offset).max(S::zero()),
                edge: Some(edge),
            });
            if matches!(nodes[b].kind, EventKind::Arrival(_)) {
                offset = S::zero();
                hop += 1;
            } else {
                offset = end;
            }
        }
        chains.push(out);
    }

    let index_of = |n: usize| {
        let r = tpg.nodes()[n].robot;
        (
            r.0,
            tpg.chain(r)
                .iter()
                .position(|&m| m == n)
                .expect("node in chain"),
        )
    };
    for arc in tpg.inter_arcs() {
        let (from, to) = if delta > S::zero() {
            let (j, ji) = index_of(arc.from);
            let (k, ki) = index_of(arc.to);
            let from = cleared_id[j]
                .get(ji)
                .copied()
                .unwrap_or(arrival_id[arc.from]);
            (from, approach_id[k][ki - 1])
        } else {
            (arrival_id[arc.from], arrival_id[arc.to])
        };
        arcs.push(AugArc {
            from,
            to,
            kind: ArcKind::Inter,
            length: S::zero(),
            edge: None,
        });
    }
    Ok(AugmentedTpg {
        delta,
        nodes,
        arcs,
        chains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{two_team_graph, two_team_plan};
    use crate::post::build_tpg;

    fn fixture() -> (Graph<f64>, Tpg) {
        let g = two_team_graph::<f64>();
        let tpg = build_tpg(&two_team_plan(&g), &g).unwrap();
        (g, tpg)
    }

    #[test]
    fn zero_delta_is_identity() {
        let (g, tpg) = fixture();
        let aug = augment_tpg(&tpg, 0.0, &g).unwrap();
        assert_eq!(aug.nodes().len(), tpg.nodes().len());
        assert_eq!(aug.arcs().len(), tpg.arcs().len());
        for (a, t) in aug.arcs().iter().zip(tpg.arcs()) {
            assert_eq!((a.from, a.to, a.kind), (t.from, t.to, t.kind));
        }
    }

    #[test]
    fn markers_at_delta() {
        let (g, tpg) = fixture();
        let aug = augment_tpg(&tpg, 0.2, &g).unwrap();
        assert!(aug.is_acyclic());
        let inter: Vec<_> = aug
            .arcs()
            .iter()
            .filter(|a| a.kind == ArcKind::Inter)
            .collect();
        assert_eq!(inter.len(), 6);
        for arc in inter {
            let (a, b) = (aug.nodes()[arc.from], aug.nodes()[arc.to]);
            let EventKind::Approach(l) = b.kind else {
                panic!("{b:?}")
            };
            assert!((b.position.distance(&g.position(l)) - 0.2).abs() < 1e-12);
            match a.kind {
                EventKind::Cleared(m) => {
                    assert!(g.adjacent(l, m));
                    assert!((a.position.distance(&g.position(m)) - 0.2).abs() < 1e-12);
                }
                // Robot 1 parks at I right after leaving H.
                EventKind::Arrival(m) => assert_eq!(g.name(m), "I"),
                other => panic!("{other:?}"),
            }
        }
        // Arc lengths along each chain still sum to the path length.
        for r in 0..3 {
            let chain = aug.chain(RobotId(r));
            let total: f64 = aug
                .arcs()
                .iter()
                .filter(|a| a.kind == ArcKind::Intra && chain.contains(&a.from))
                .map(|a| a.length)
                .sum();
            assert!((total - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_bound() {
        let (g, tpg) = fixture();
        assert!(augment_tpg(&tpg, 0.5, &g).is_ok());
        assert!(matches!(
            augment_tpg(&tpg, 0.6, &g),
            Err(PostError::DeltaTooLarge { .. })
        ));
        assert!(augment_tpg(&tpg, -0.1, &g).is_err());
    }
}
