use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use super::{
    branch, check_instance, constraints_of, focal_search, horizon, merged_plan, search, Budget,
    ConstraintTable, CostModel, Objective, PlanError, Reservations, SearchLimits,
    SpaceTimeConstraint, MERGE_AFTER,
};
use crate::scalar::Scalar;
use crate::world::{
    count_conflicts, first_conflict, DiscretePlan, MapfInstance, RobotId, VertexId,
};

struct CtNode {
    constraints: Vec<SpaceTimeConstraint>,
    paths: Vec<Vec<VertexId>>,
    /// Shortest constrained path length per robot.
    lower: Vec<usize>,
}

/// Optimal conflict-based search.
///
/// Each robot's path is the one with the fewest conflicts among those that
/// keep the node at its optimal cost: its own shortest length for flowtime,
/// anything up to the node's makespan for makespan.
pub fn plan_cbs<S: Scalar>(
    instance: &MapfInstance<S>,
    objective: Objective,
) -> Result<DiscretePlan, PlanError> {
    plan_cbs_with(instance, objective, &SearchLimits::default())
}

pub fn plan_cbs_with<S: Scalar>(
    instance: &MapfInstance<S>,
    objective: Objective,
    limits: &SearchLimits,
) -> Result<DiscretePlan, PlanError> {
    check_instance(instance)?;
    let graph = &instance.graph;
    let cap = horizon(instance);
    let contexts: Vec<(Vec<usize>, Vec<f64>)> = instance
        .robots
        .iter()
        .map(|r| {
            (
                graph.hop_distances(r.target),
                CostModel::Unit.cost_to_go(graph, r.target),
            )
        })
        .collect();
    let low_level = |robot: usize,
                     constraints: &[SpaceTimeConstraint],
                     paths: &[Vec<VertexId>],
                     lower: &[usize]| {
        let r = instance.robots[robot];
        let (hops, h) = &contexts[robot];
        let table = ConstraintTable::new(&constraints_of(constraints, RobotId(robot)));
        let optimal = search(graph, r.start, r.target, &table, &CostModel::Unit, h, cap)?;
        let own = optimal.vertices.len() - 1;
        let limit = match objective {
            Objective::Makespan => lower
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != robot)
                .map(|(_, &l)| l)
                .fold(own, usize::max),
            Objective::Flowtime => own,
        };
        let others = Reservations::new(
            paths
                .iter()
                .enumerate()
                .filter(|(i, p)| *i != robot && !p.is_empty())
                .map(|(_, p)| p.as_slice()),
        );
        let path = focal_search(
            graph,
            r.start,
            r.target,
            &table,
            &others,
            limit,
            hops,
            &CostModel::Unit,
            h,
        )
        .map(|p| p.vertices)
        .unwrap_or(optimal.vertices);
        Some((path, own))
    };

    let n = instance.num_robots();
    let mut paths: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut lower = vec![0; n];
    for i in 0..n {
        let (p, l) = low_level(i, &[], &paths, &lower).ok_or(PlanError::Infeasible)?;
        paths[i] = p;
        lower[i] = l;
    }
    let cost = objective.aggregate(lower.iter().copied());
    let conflicts = count_conflicts(&paths);
    let mut arena = vec![CtNode {
        constraints: Vec::new(),
        paths,
        lower,
    }];
    let mut open = BinaryHeap::new();
    open.push(Reverse((cost, conflicts, 0usize)));
    let mut seen: HashSet<Vec<SpaceTimeConstraint>> = HashSet::new();
    let mut budget = Budget::new(limits);
    let mut expanded = 0;

    while let Some(Reverse((_, _, id))) = open.pop() {
        budget.tick()?;
        expanded += 1;
        if expanded == MERGE_AFTER {
            if let Some(plan) = merged_plan(instance, objective, &mut budget)? {
                return Ok(plan);
            }
        }
        let Some(conflict) = first_conflict(&arena[id].paths) else {
            return Ok(DiscretePlan::new(std::mem::take(&mut arena[id].paths)));
        };
        for constraint in branch(&conflict, &arena[id].paths) {
            let mut constraints = arena[id].constraints.clone();
            constraints.push(constraint);
            constraints.sort();
            if !seen.insert(constraints.clone()) {
                continue;
            }
            let robot = constraint.robot.0;
            let node = &arena[id];
            let Some((path, own)) = low_level(robot, &constraints, &node.paths, &node.lower) else {
                continue;
            };
            let mut paths = node.paths.clone();
            let mut lower = node.lower.clone();
            paths[robot] = path;
            lower[robot] = own;
            let cost = objective.aggregate(lower.iter().copied());
            let conflicts = count_conflicts(&paths);
            arena.push(CtNode {
                constraints,
                paths,
                lower,
            });
            open.push(Reverse((cost, conflicts, arena.len() - 1)));
        }
        // Expanded nodes are never revisited.
        arena[id].paths = Vec::new();
        arena[id].constraints = Vec::new();
    }
    Err(PlanError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{detect_conflicts, GraphBuilder, RobotSpec};

    #[test]
    fn chain_swap_is_infeasible() {
        let mut b = GraphBuilder::<f64>::new();
        let a = b.vertex("A", 0.0, 0.0);
        let m = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 2.0, 0.0);
        b.edge(a, m, 1.0).edge(m, c, 1.0);
        let inst = MapfInstance::new(
            b.build().unwrap(),
            vec![
                RobotSpec {
                    start: a,
                    target: c,
                },
                RobotSpec {
                    start: c,
                    target: a,
                },
            ],
        );
        assert!(matches!(
            plan_cbs(&inst, Objective::Makespan),
            Err(PlanError::Infeasible)
        ));
    }

    #[test]
    fn passing_bay_resolves_swap() {
        // A - B - C with a bay D hanging off B.
        let mut b = GraphBuilder::<f64>::new();
        let a = b.vertex("A", 0.0, 0.0);
        let m = b.vertex("B", 1.0, 0.0);
        let c = b.vertex("C", 2.0, 0.0);
        let d = b.vertex("D", 1.0, 1.0);
        b.edge(a, m, 1.0).edge(m, c, 1.0).edge(m, d, 1.0);
        let inst = MapfInstance::new(
            b.build().unwrap(),
            vec![
                RobotSpec {
                    start: a,
                    target: c,
                },
                RobotSpec {
                    start: c,
                    target: a,
                },
            ],
        );
        for obj in [Objective::Makespan, Objective::Flowtime] {
            let plan = plan_cbs(&inst, obj).unwrap();
            assert!(detect_conflicts(&plan, &inst.graph).unwrap().is_empty());
            assert_eq!(plan.makespan(), 4);
        }
    }

    #[test]
    fn three_robots_pass_in_a_corridor() {
        // A - B - C - D - E with a bay F off C. Every robot must get past the
        // others, which takes plain conflict splitting far too long.
        let mut b = GraphBuilder::<f64>::new();
        let v: Vec<VertexId> = ["A", "B", "C", "D", "E"]
            .iter()
            .enumerate()
            .map(|(i, &n)| b.vertex(n, i as f64, 0.0))
            .collect();
        let f = b.vertex("F", 2.0, 1.0);
        for w in v.windows(2) {
            b.edge(w[0], w[1], 1.0);
        }
        b.edge(v[2], f, 1.0);
        let robots = [(v[3], v[1]), (v[0], v[3]), (v[4], v[0])]
            .into_iter()
            .map(|(start, target)| RobotSpec { start, target })
            .collect();
        let inst = MapfInstance::new(b.build().unwrap(), robots);
        let limits = SearchLimits::with_timeout(std::time::Duration::from_secs(5));
        let plan = plan_cbs_with(&inst, Objective::Makespan, &limits).unwrap();
        assert!(detect_conflicts(&plan, &inst.graph).unwrap().is_empty());
        assert_eq!(plan.makespan(), 9);
    }
}
