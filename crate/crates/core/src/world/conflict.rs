use std::collections::HashMap;

use super::{DiscretePlan, Graph, RobotId, VertexId, WorldError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    /// Both robots occupy the vertex.
    Vertex(VertexId),
    /// The first robot moves `from -> to` while the second moves `to -> from`.
    Edge { from: VertexId, to: VertexId },
    /// Three or more robots rotate around a cycle in one step. The first
    /// robot moves `from -> to`, into the vertex the second is leaving.
    Cycle { from: VertexId, to: VertexId },
}

/// A collision between two robots. For edge conflicts `timestep` is the step
/// at which the swap completes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conflict {
    pub timestep: usize,
    pub robots: (RobotId, RobotId),
    pub kind: ConflictKind,
}

/// Robots that rotate around a cycle of length three or more between two
/// consecutive configurations. Each cycle starts at its smallest robot and
/// lists robots in travel order: each moves into the vertex its successor
/// leaves.
pub fn rotation_cycles(prev: &[VertexId], next: &[VertexId]) -> Vec<Vec<usize>> {
    let mut leaving: HashMap<VertexId, usize> = HashMap::new();
    for r in (0..prev.len()).rev() {
        if prev[r] != next[r] {
            leaving.insert(prev[r], r);
        }
    }
    let mut done = vec![false; prev.len()];
    let mut out = Vec::new();
    for start in 0..prev.len() {
        if done[start] || prev[start] == next[start] {
            continue;
        }
        let mut chain = vec![start];
        let mut cur = start;
        done[start] = true;
        while let Some(&succ) = leaving.get(&next[cur]) {
            if succ == start {
                if chain.len() >= 3 {
                    out.push(chain.clone());
                }
                break;
            }
            if done[succ] {
                break;
            }
            done[succ] = true;
            chain.push(succ);
            cur = succ;
        }
    }
    out
}

fn cycle_conflict(cycle: &[usize], prev: &[VertexId], next: &[VertexId], t: usize) -> Conflict {
    let (a, b) = (cycle[0], cycle[1]);
    Conflict {
        timestep: t,
        robots: (RobotId(a), RobotId(b)),
        kind: ConflictKind::Cycle {
            from: prev[a],
            to: next[a],
        },
    }
}

/// All vertex, swap and rotation conflicts, ordered by timestep, then robot
/// pair.
///
/// Robots that have finished their path keep occupying their last vertex.
/// Following into a just-vacated vertex is not a conflict unless the
/// followers close a cycle.
pub fn detect_conflicts<S: Scalar>(
    plan: &DiscretePlan,
    graph: &Graph<S>,
) -> Result<Vec<Conflict>, WorldError> {
    plan.check_moves(graph)?;
    let n = plan.num_robots();
    let horizon = plan.makespan();
    let mut out = Vec::new();
    let mut occupied: HashMap<VertexId, Vec<usize>> = HashMap::new();
    let mut moves: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for t in 0..=horizon {
        occupied.clear();
        for r in 0..n {
            occupied.entry(plan.at(RobotId(r), t)).or_default().push(r);
        }
        let mut step = Vec::new();
        for (&v, robots) in &occupied {
            for (i, &a) in robots.iter().enumerate() {
                for &b in &robots[i + 1..] {
                    step.push(Conflict {
                        timestep: t,
                        robots: (RobotId(a), RobotId(b)),
                        kind: ConflictKind::Vertex(v),
                    });
                }
            }
        }
        if t > 0 {
            moves.clear();
            for r in 0..n {
                let (from, to) = (plan.at(RobotId(r), t - 1), plan.at(RobotId(r), t));
                if from != to {
                    moves.insert((from, to), r);
                }
            }
            for (&(from, to), &a) in &moves {
                if let Some(&b) = moves.get(&(to, from)) {
                    if a < b {
                        step.push(Conflict {
                            timestep: t,
                            robots: (RobotId(a), RobotId(b)),
                            kind: ConflictKind::Edge { from, to },
                        });
                    }
                }
            }
            let prev: Vec<VertexId> = (0..n).map(|r| plan.at(RobotId(r), t - 1)).collect();
            let next: Vec<VertexId> = (0..n).map(|r| plan.at(RobotId(r), t)).collect();
            for cycle in rotation_cycles(&prev, &next) {
                step.push(cycle_conflict(&cycle, &prev, &next, t));
            }
        }
        step.sort();
        out.extend(step);
    }
    Ok(out)
}

/// Earliest conflict under the same ordering, without materializing the rest.
pub fn first_conflict(paths: &[Vec<VertexId>]) -> Option<Conflict> {
    let horizon = paths
        .iter()
        .map(|p| p.len().saturating_sub(1))
        .max()
        .unwrap_or(0);
    let at = |r: usize, t: usize| paths[r][t.min(paths[r].len() - 1)];
    let n = paths.len();
    for t in 0..=horizon {
        let mut best: Option<Conflict> = None;
        for a in 0..n {
            for b in a + 1..n {
                let c = if at(a, t) == at(b, t) {
                    Some(Conflict {
                        timestep: t,
                        robots: (RobotId(a), RobotId(b)),
                        kind: ConflictKind::Vertex(at(a, t)),
                    })
                } else if t > 0 && at(a, t) == at(b, t - 1) && at(b, t) == at(a, t - 1) {
                    Some(Conflict {
                        timestep: t,
                        robots: (RobotId(a), RobotId(b)),
                        kind: ConflictKind::Edge {
                            from: at(a, t - 1),
                            to: at(a, t),
                        },
                    })
                } else {
                    None
                };
                if let Some(c) = c {
                    if best.is_none_or(|x| c < x) {
                        best = Some(c);
                    }
                }
            }
        }
        if t > 0 {
            let prev: Vec<VertexId> = (0..n).map(|r| at(r, t - 1)).collect();
            let next: Vec<VertexId> = (0..n).map(|r| at(r, t)).collect();
            for cycle in rotation_cycles(&prev, &next) {
                let c = cycle_conflict(&cycle, &prev, &next, t);
                if best.is_none_or(|x| c < x) {
                    best = Some(c);
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Number of conflicts in `paths`: colliding pairs per vertex and timestep,
/// swapping pairs and rotating cycles.
pub fn count_conflicts(paths: &[Vec<VertexId>]) -> usize {
    let horizon = paths
        .iter()
        .map(|p| p.len().saturating_sub(1))
        .max()
        .unwrap_or(0);
    let at = |r: usize, t: usize| paths[r][t.min(paths[r].len() - 1)];
    let mut total = 0;
    let mut occupied: HashMap<VertexId, usize> = HashMap::new();
    let mut moves: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for t in 0..=horizon {
        occupied.clear();
        moves.clear();
        for r in 0..paths.len() {
            let v = at(r, t);
            let c = occupied.entry(v).or_insert(0);
            total += *c;
            *c += 1;
            if t > 0 && at(r, t - 1) != v {
                let from = at(r, t - 1);
                total += moves.get(&(v, from)).copied().unwrap_or(0);
                *moves.entry((from, v)).or_insert(0) += 1;
            }
        }
        if t > 0 && !moves.is_empty() {
            let prev: Vec<VertexId> = (0..paths.len()).map(|r| at(r, t - 1)).collect();
            let next: Vec<VertexId> = (0..paths.len()).map(|r| at(r, t)).collect();
            total += rotation_cycles(&prev, &next).len();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::GraphBuilder;

    fn chain() -> Graph<f64> {
        let mut b = GraphBuilder::new();
        let a = b.vertex("A", 0.0, 0.0);
        let bb = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 2.0, 0.0);
        b.edge(a, bb, 1.0).edge(bb, c, 1.0);
        b.build().unwrap()
    }

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn swap_is_one_edge_conflict() {
        let g = chain();
        let plan = DiscretePlan::new(vec![vec![v(0), v(1)], vec![v(1), v(0)]]);
        let c = detect_conflicts(&plan, &g).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].timestep, 1);
        assert_eq!(
            c[0].kind,
            ConflictKind::Edge {
                from: v(0),
                to: v(1)
            }
        );
        assert_eq!(first_conflict(plan.paths()), Some(c[0]));
        assert_eq!(count_conflicts(plan.paths()), 1);
    }

    #[test]
    fn shared_vertex_is_one_vertex_conflict() {
        let g = chain();
        let plan = DiscretePlan::new(vec![
            vec![v(0), v(1), v(2)],
            vec![v(2), v(2), v(2)],
            vec![v(1), v(0)],
        ]);
        let c = detect_conflicts(&plan, &g).unwrap();
        assert_eq!(
            c,
            vec![
                Conflict {
                    timestep: 1,
                    robots: (RobotId(0), RobotId(2)),
                    kind: ConflictKind::Edge {
                        from: v(0),
                        to: v(1)
                    }
                },
                Conflict {
                    timestep: 2,
                    robots: (RobotId(0), RobotId(1)),
                    kind: ConflictKind::Vertex(v(2))
                },
            ]
        );
    }

    #[test]
    fn following_is_fine() {
        let g = chain();
        let plan = DiscretePlan::new(vec![vec![v(1), v(2)], vec![v(0), v(1)]]);
        assert!(detect_conflicts(&plan, &g).unwrap().is_empty());
        assert_eq!(first_conflict(plan.paths()), None);
    }

    #[test]
    fn rotation_is_a_conflict() {
        // Triangle A-B-C.
        let mut b = GraphBuilder::<f64>::new();
        let a = b.vertex("A", 0.0, 0.0);
        let bb = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 0.5, 1.0);
        b.edge(a, bb, 1.0).edge(bb, c, 1.0).edge(c, a, 1.0);
        let g = b.build().unwrap();
        let plan = DiscretePlan::new(vec![vec![a, bb], vec![bb, c], vec![c, a]]);
        let found = detect_conflicts(&plan, &g).unwrap();
        assert_eq!(
            found,
            vec![Conflict {
                timestep: 1,
                robots: (RobotId(0), RobotId(1)),
                kind: ConflictKind::Cycle { from: a, to: bb }
            }]
        );
        assert_eq!(first_conflict(plan.paths()), Some(found[0]));
        assert_eq!(count_conflicts(plan.paths()), 1);
        assert_eq!(
            rotation_cycles(&[a, bb, c], &[bb, c, a]),
            vec![vec![0, 1, 2]]
        );
        // An open chain of followers is fine.
        assert!(rotation_cycles(&[a, bb], &[bb, c]).is_empty());
    }

    #[test]
    fn finished_robot_still_blocks() {
        let g = chain();
        let plan = DiscretePlan::new(vec![vec![v(1)], vec![v(0), v(0), v(1)]]);
        let c = detect_conflicts(&plan, &g).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].timestep, 2);
    }

    #[test]
    fn jump_is_rejected() {
        let g = chain();
        let plan = DiscretePlan::new(vec![vec![v(0), v(2)]]);
        assert!(detect_conflicts(&plan, &g).is_err());
    }
}
