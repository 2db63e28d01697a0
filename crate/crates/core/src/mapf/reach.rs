use std::collections::{HashSet, VecDeque};

use crate::scalar::Scalar;
use crate::world::{rotation_cycles, Graph, VertexId};

/// Whether the joint configuration can ever reach the targets, ignoring time.
///
/// Robots within a group are interchangeable: a group is done when its
/// positions equal its targets as a set. Returns `None` once `max_work`
/// successor configurations have been generated.
pub(crate) fn joint_reachable<S: Scalar>(
    graph: &Graph<S>,
    groups: &[(Vec<VertexId>, Vec<VertexId>)],
    max_work: usize,
) -> Option<bool> {
    let canon = |mut state: Vec<VertexId>| {
        let mut at = 0;
        for (starts, _) in groups {
            state[at..at + starts.len()].sort();
            at += starts.len();
        }
        state
    };
    let robots: usize = groups.iter().map(|g| g.0.len()).sum();
    if (graph.num_vertices() as f64).powi(robots as i32) > max_work as f64 {
        return None;
    }
    let start = canon(groups.iter().flat_map(|g| g.0.iter().copied()).collect());
    let goal = canon(groups.iter().flat_map(|g| g.1.iter().copied()).collect());
    if start == goal {
        return Some(true);
    }
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut work = 0usize;
    while let Some(state) = queue.pop_front() {
        let mut next = state.clone();
        let mut found = false;
        let complete = successors(graph, &state, &[], &mut next, 0, &mut |s| {
            work += 1;
            if work > max_work {
                return false;
            }
            if !rotation_cycles(&state, s).is_empty() {
                return true;
            }
            let s = canon(s.to_vec());
            if s == goal {
                found = true;
                return false;
            }
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
            true
        });
        if found {
            return Some(true);
        }
        if !complete {
            return None;
        }
    }
    Some(false)
}

/// Joint moves free of vertex and swap conflicts, emitted until `emit`
/// returns false. Robots flagged in `frozen` stay put.
pub(crate) fn successors<S: Scalar>(
    graph: &Graph<S>,
    state: &[VertexId],
    frozen: &[bool],
    next: &mut Vec<VertexId>,
    i: usize,
    emit: &mut impl FnMut(&[VertexId]) -> bool,
) -> bool {
    if i == state.len() {
        return emit(next);
    }
    let v = state[i];
    let stays = frozen.get(i).copied().unwrap_or(false);
    let moves = graph
        .neighbors(v)
        .iter()
        .map(|&(w, _)| w)
        .filter(|_| !stays);
    let options = std::iter::once(v).chain(moves);
    for w in options {
        let clash = (0..i).any(|j| next[j] == w || (next[j] == v && state[j] == w));
        if !clash {
            next[i] = w;
            if !successors(graph, state, frozen, next, i + 1, emit) {
                next[i] = v;
                return false;
            }
        }
    }
    next[i] = v;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::GraphBuilder;

    fn chain() -> Graph<f64> {
        let mut b = GraphBuilder::new();
        let a = b.vertex("A", 0.0, 0.0);
        let m = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 2.0, 0.0);
        b.edge(a, m, 1.0);
        b.edge(m, c, 1.0);
        b.build().unwrap()
    }

    #[test]
    fn chain_swap_unreachable() {
        let g = chain();
        let groups = [
            (vec![VertexId(0)], vec![VertexId(2)]),
            (vec![VertexId(2)], vec![VertexId(0)]),
        ];
        assert_eq!(joint_reachable(&g, &groups, 1000), Some(false));
    }

    #[test]
    fn anonymous_swap_is_trivial() {
        let g = chain();
        let groups = [(
            vec![VertexId(0), VertexId(2)],
            vec![VertexId(2), VertexId(0)],
        )];
        assert_eq!(joint_reachable(&g, &groups, 1000), Some(true));
    }

    #[test]
    fn triangle_rotation_is_not_a_move() {
        let mut b = GraphBuilder::new();
        let a = b.vertex("A", 0.0, 0.0);
        let m = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 0.5, 1.0);
        b.edge(a, m, 1.0).edge(m, c, 1.0).edge(c, a, 1.0);
        let g: Graph<f64> = b.build().unwrap();
        let groups = [(vec![a], vec![m]), (vec![m], vec![c]), (vec![c], vec![a])];
        assert_eq!(joint_reachable(&g, &groups, 1000), Some(false));
    }

    #[test]
    fn work_cap_gives_up() {
        let g = chain();
        let groups = [(vec![VertexId(0)], vec![VertexId(2)])];
        assert_eq!(joint_reachable(&g, &groups, 0), None);
    }
}
