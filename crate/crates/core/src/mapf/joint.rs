use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use super::reach::successors;
use super::{Budget, Objective, PlanError};
use crate::scalar::Scalar;
use crate::world::{rotation_cycles, Graph, VertexId};

struct Node {
    pos: Vec<VertexId>,
    /// Robots that have finished at their target (flowtime only).
    done: u64,
    time: usize,
    g: usize,
    parent: Option<usize>,
}

/// Optimal plan by A* over joint configurations: every robot merged into
/// one agent. `groups` holds `(starts, targets)` of interchangeable robots;
/// paths come back in group order. For flowtime a robot standing on one of
/// its group's targets may finish, after which it stays and stops paying for
/// steps.
///
/// `Ok(None)` once more than `max_states` configurations have been stored.
pub(crate) fn joint_plan<S: Scalar>(
    graph: &Graph<S>,
    groups: &[(Vec<VertexId>, Vec<VertexId>)],
    objective: Objective,
    max_states: usize,
    budget: &mut Budget,
) -> Result<Option<Vec<Vec<VertexId>>>, PlanError> {
    let group_of: Vec<usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, (starts, _))| std::iter::repeat_n(g, starts.len()))
        .collect();
    let n = group_of.len();
    if n > 64 {
        return Ok(None);
    }
    // Hops to the nearest target of each group.
    let group_hops: Vec<Vec<usize>> = groups
        .iter()
        .map(|(_, targets)| {
            let mut best = vec![usize::MAX; graph.num_vertices()];
            for &t in targets {
                for (b, d) in best.iter_mut().zip(graph.hop_distances(t)) {
                    *b = (*b).min(d);
                }
            }
            best
        })
        .collect();
    let hops: Vec<&Vec<usize>> = group_of.iter().map(|&g| &group_hops[g]).collect();
    let at_target = |i: usize, v: VertexId| groups[group_of[i]].1.contains(&v);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let h = |pos: &[VertexId], done: u64| -> Option<usize> {
        let mut d = pos.iter().enumerate().map(|(i, v)| (i, hops[i][v.0]));
        match objective {
            Objective::Makespan => d.try_fold(0, |m, (_, h)| (h != usize::MAX).then(|| m.max(h))),
            Objective::Flowtime => d
                .filter(|&(i, _)| done & (1 << i) == 0)
                .try_fold(0, |s, (_, h)| (h != usize::MAX).then_some(s + h)),
        }
    };
    let is_goal = |pos: &[VertexId], done: u64| match objective {
        // Positions are distinct, so every robot on a target of its group
        // fills each group's targets exactly.
        Objective::Makespan => pos.iter().enumerate().all(|(i, &v)| at_target(i, v)),
        Objective::Flowtime => done == all,
    };

    let start: Vec<VertexId> = groups.iter().flat_map(|(s, _)| s.iter().copied()).collect();
    let Some(h0) = h(&start, 0) else {
        return Err(PlanError::Infeasible);
    };
    let mut arena = vec![Node {
        pos: start.clone(),
        done: 0,
        time: 0,
        g: 0,
        parent: None,
    }];
    let mut best: HashMap<(Vec<VertexId>, u64), usize> = HashMap::from([((start, 0), 0)]);
    // Ties prefer deeper nodes, then insertion order.
    let mut open = BinaryHeap::from([Reverse((h0, Reverse(0usize), 0usize))]);

    while let Some(Reverse((_, Reverse(g), id))) = open.pop() {
        if g > arena[id].g {
            continue;
        }
        budget.tick()?;
        if is_goal(&arena[id].pos, arena[id].done) {
            return Ok(Some(unwind(&arena, id, n)));
        }
        let (pos, done, time) = (arena[id].pos.clone(), arena[id].done, arena[id].time);
        let mut children: Vec<(Vec<VertexId>, u64, usize, usize)> = Vec::new();
        if objective == Objective::Flowtime {
            for i in 0..n {
                if done & (1 << i) == 0 && at_target(i, pos[i]) {
                    children.push((pos.clone(), done | (1 << i), time, g));
                }
            }
        }
        let step = match objective {
            Objective::Makespan => 1,
            Objective::Flowtime => n - done.count_ones() as usize,
        };
        let frozen: Vec<bool> = (0..n).map(|i| done & (1 << i) != 0).collect();
        let mut next = pos.clone();
        successors(graph, &pos, &frozen, &mut next, 0, &mut |s| {
            if rotation_cycles(&pos, s).is_empty() {
                children.push((s.to_vec(), done, time + 1, g + step));
            }
            true
        });
        for (p, d, t, cost) in children {
            let Some(est) = h(&p, d) else { continue };
            let child = arena.len();
            match best.entry((p.clone(), d)) {
                Entry::Occupied(mut e) => {
                    if arena[*e.get()].g <= cost {
                        continue;
                    }
                    e.insert(child);
                }
                Entry::Vacant(e) => {
                    e.insert(child);
                }
            }
            if arena.len() >= max_states {
                return Ok(None);
            }
            arena.push(Node {
                pos: p,
                done: d,
                time: t,
                g: cost,
                parent: Some(id),
            });
            open.push(Reverse((cost + est, Reverse(cost), child)));
        }
    }
    Err(PlanError::Infeasible)
}

fn unwind(arena: &[Node], mut id: usize, robots: usize) -> Vec<Vec<VertexId>> {
    let mut states = Vec::new();
    loop {
        let node = &arena[id];
        if states.last().is_none_or(|&(t, _)| t != node.time) {
            states.push((node.time, id));
        }
        match node.parent {
            Some(p) => id = p,
            None => break,
        }
    }
    states.reverse();
    (0..robots)
        .map(|r| states.iter().map(|&(_, s)| arena[s].pos[r]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapf::SearchLimits;
    use crate::world::GraphBuilder;

    /// A - B - C with a bay D off B.
    fn bay() -> (Graph<f64>, [VertexId; 4]) {
        let mut b = GraphBuilder::new();
        let a = b.vertex("A", 0.0, 0.0);
        let m = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 2.0, 0.0);
        let d = b.vertex("D", 1.0, 1.0);
        b.edge(a, m, 1.0).edge(m, c, 1.0).edge(m, d, 1.0);
        (b.build().unwrap(), [a, m, c, d])
    }

    #[test]
    fn swap_through_a_bay() {
        let (g, [a, _, c, _]) = bay();
        let robots = [(vec![a], vec![c]), (vec![c], vec![a])];
        let mut budget = Budget::new(&SearchLimits::default());
        let paths = joint_plan(&g, &robots, Objective::Makespan, 10_000, &mut budget)
            .unwrap()
            .unwrap();
        assert_eq!(paths[0].len() - 1, 4);
        assert_eq!(paths[0][0], a);
        assert_eq!(*paths[1].last().unwrap(), a);
        let paths = joint_plan(&g, &robots, Objective::Flowtime, 10_000, &mut budget)
            .unwrap()
            .unwrap();
        let flowtime: usize = crate::world::DiscretePlan::new(paths)
            .paths()
            .iter()
            .map(|p| p.len() - 1)
            .sum();
        assert_eq!(flowtime, 7);
    }

    #[test]
    fn chain_swap_is_infeasible() {
        let mut b = GraphBuilder::<f64>::new();
        let a = b.vertex("A", 0.0, 0.0);
        let c = b.vertex("C", 1.0, 0.0);
        b.edge(a, c, 1.0);
        let g = b.build().unwrap();
        let robots = [(vec![a], vec![c]), (vec![c], vec![a])];
        let mut budget = Budget::new(&SearchLimits::default());
        assert!(matches!(
            joint_plan(&g, &robots, Objective::Makespan, 100, &mut budget),
            Err(PlanError::Infeasible)
        ));
    }

    #[test]
    fn teams_are_anonymous() {
        let (g, [a, _, c, _]) = bay();
        let team = [(vec![a, c], vec![c, a])];
        let mut budget = Budget::new(&SearchLimits::default());
        let paths = joint_plan(&g, &team, Objective::Makespan, 100, &mut budget)
            .unwrap()
            .unwrap();
        assert_eq!(paths, vec![vec![a], vec![c]]);
    }

    #[test]
    fn state_cap_gives_up() {
        let (g, [a, _, c, _]) = bay();
        let robots = [(vec![a], vec![c]), (vec![c], vec![a])];
        let mut budget = Budget::new(&SearchLimits::default());
        assert!(matches!(
            joint_plan(&g, &robots, Objective::Makespan, 2, &mut budget),
            Ok(None)
        ));
    }
}
