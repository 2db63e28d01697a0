use std::collections::{BTreeSet, HashSet};

use super::{
    branch, check_instance, constraints_of, focal_search, horizon, merged_plan, search, Budget,
    ConstraintTable, CostModel, HighwaySet, Objective, PlanError, Reservations, SearchLimits,
    SpaceTimeConstraint, SuboptimalityBound, MERGE_AFTER,
};
use crate::scalar::Scalar;
use crate::world::{
    count_conflicts, first_conflict, DiscretePlan, MapfInstance, RobotId, VertexId,
};

struct CtNode {
    constraints: Vec<SpaceTimeConstraint>,
    paths: Vec<Vec<VertexId>>,
    /// Per-robot optimal cost under this node's constraints.
    lower: Vec<usize>,
    lower_total: usize,
    cost: usize,
    conflicts: usize,
}

struct RobotContext {
    hops: Vec<usize>,
    unit_h: Vec<f64>,
    pref_h: Vec<f64>,
}

/// Bounded-suboptimal conflict-based search with focal lists at both levels.
///
/// The returned plan's objective is at most `w` times the optimum. With
/// highways, moves opposing a highway are charged `w` in the focal
/// preference ordering, which steers paths onto highways without touching
/// the bound, since the bound is enforced on true (unit) costs.
pub fn plan_ecbs<S: Scalar>(
    instance: &MapfInstance<S>,
    objective: Objective,
    bound: SuboptimalityBound,
    highways: Option<&HighwaySet>,
) -> Result<DiscretePlan, PlanError> {
    plan_ecbs_with(
        instance,
        objective,
        bound,
        highways,
        &SearchLimits::default(),
    )
}

pub fn plan_ecbs_with<S: Scalar>(
    instance: &MapfInstance<S>,
    objective: Objective,
    bound: SuboptimalityBound,
    highways: Option<&HighwaySet>,
    limits: &SearchLimits,
) -> Result<DiscretePlan, PlanError> {
    check_instance(instance)?;
    let graph = &instance.graph;
    let cap = horizon(instance);
    let pref = match highways {
        Some(h) if !h.is_empty() => CostModel::Highways {
            highways: h,
            weight: bound.get(),
        },
        _ => CostModel::Unit,
    };
    let contexts: Vec<RobotContext> = instance
        .robots
        .iter()
        .map(|r| RobotContext {
            hops: graph.hop_distances(r.target),
            unit_h: CostModel::Unit.cost_to_go(graph, r.target),
            pref_h: pref.cost_to_go(graph, r.target),
        })
        .collect();

    // Optimal cost, then a conflict-averse path within the bound.
    let low_level = |robot: usize, constraints: &[SpaceTimeConstraint], paths: &[Vec<VertexId>]| {
        let r = instance.robots[robot];
        let ctx = &contexts[robot];
        let table = ConstraintTable::new(&constraints_of(constraints, RobotId(robot)));
        let optimal = search(
            graph,
            r.start,
            r.target,
            &table,
            &CostModel::Unit,
            &ctx.unit_h,
            cap,
        )?;
        let lower = optimal.vertices.len() - 1;
        let others = Reservations::new(
            paths
                .iter()
                .enumerate()
                .filter(|(i, p)| *i != robot && !p.is_empty())
                .map(|(_, p)| p.as_slice()),
        );
        let limit = bound.scale(lower).min(cap.max(lower));
        let path = focal_search(
            graph,
            r.start,
            r.target,
            &table,
            &others,
            limit,
            &ctx.hops,
            &pref,
            &ctx.pref_h,
        )
        .map(|p| p.vertices)
        .unwrap_or(optimal.vertices);
        Some((path, lower))
    };

    let n = instance.num_robots();
    let mut paths: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut lower = vec![0; n];
    for i in 0..n {
        let (p, lb) = low_level(i, &[], &paths).ok_or(PlanError::Infeasible)?;
        paths[i] = p;
        lower[i] = lb;
    }
    let mut arena = vec![make_node(Vec::new(), paths, lower, objective)];
    let mut by_lower: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut by_cost: BTreeSet<(usize, usize)> = BTreeSet::new();
    by_lower.insert((arena[0].lower_total, 0));
    by_cost.insert((arena[0].cost, 0));
    let mut seen: HashSet<Vec<SpaceTimeConstraint>> = HashSet::new();
    let mut budget = Budget::new(limits);
    let mut expanded = 0;

    while let Some(&(best_lower, _)) = by_lower.first() {
        budget.tick()?;
        expanded += 1;
        if expanded == MERGE_AFTER {
            if let Some(plan) = merged_plan(instance, objective, &mut budget)? {
                return Ok(plan);
            }
        }
        let threshold = bound.scale(best_lower);
        let id = by_cost
            .range(..=(threshold, usize::MAX))
            .map(|&(cost, id)| (arena[id].conflicts, cost, id))
            .min()
            .map(|(_, _, id)| id)
            .unwrap_or_else(|| by_lower.first().unwrap().1);
        by_lower.remove(&(arena[id].lower_total, id));
        by_cost.remove(&(arena[id].cost, id));

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
            let Some((path, lb)) = low_level(robot, &constraints, &arena[id].paths) else {
                continue;
            };
            let mut paths = arena[id].paths.clone();
            let mut lower = arena[id].lower.clone();
            paths[robot] = path;
            lower[robot] = lb;
            let node = make_node(constraints, paths, lower, objective);
            let child = arena.len();
            by_lower.insert((node.lower_total, child));
            by_cost.insert((node.cost, child));
            arena.push(node);
        }
        arena[id].paths = Vec::new();
        arena[id].constraints = Vec::new();
    }
    Err(PlanError::Infeasible)
}

fn make_node(
    constraints: Vec<SpaceTimeConstraint>,
    paths: Vec<Vec<VertexId>>,
    lower: Vec<usize>,
    objective: Objective,
) -> CtNode {
    CtNode {
        lower_total: objective.aggregate(lower.iter().copied()),
        cost: objective.aggregate(paths.iter().map(|p| p.len() - 1)),
        conflicts: count_conflicts(&paths),
        constraints,
        paths,
        lower,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapf::plan_cbs;
    use crate::world::{detect_conflicts, GridMap, RobotSpec};

    fn corridor_swap() -> MapfInstance<f64> {
        let grid = GridMap::from_rows(&["......", "@.@@.@"]).unwrap();
        let g = grid.to_graph::<f64>().unwrap();
        let v = |x: usize, y: usize| g.lookup(&GridMap::cell_name(x, y)).unwrap();
        let robots = vec![
            RobotSpec {
                start: v(0, 0),
                target: v(5, 0),
            },
            RobotSpec {
                start: v(5, 0),
                target: v(0, 0),
            },
        ];
        MapfInstance::new(g, robots)
    }

    #[test]
    fn unit_bound_matches_cbs() {
        let inst = corridor_swap();
        for obj in [Objective::Makespan, Objective::Flowtime] {
            let e = plan_ecbs(&inst, obj, SuboptimalityBound::OPTIMAL, None).unwrap();
            let c = plan_cbs(&inst, obj).unwrap();
            assert!(detect_conflicts(&e, &inst.graph).unwrap().is_empty());
            let cost = |p: &DiscretePlan| {
                obj.aggregate((0..p.num_robots()).map(|r| p.arrival(RobotId(r))))
            };
            assert_eq!(cost(&e), cost(&c));
        }
    }

    #[test]
    fn adversarial_highways_stay_solvable() {
        let inst = corridor_swap();
        let g = &inst.graph;
        let v = |x: usize, y: usize| g.lookup(&GridMap::cell_name(x, y)).unwrap();
        // Point every corridor edge away from robot 0's target.
        let pairs: Vec<_> = (0..5).map(|x| (v(x + 1, 0), v(x, 0))).collect();
        let hw = HighwaySet::new(g, pairs).unwrap();
        for set in [hw.clone(), hw.reversed()] {
            let plan = plan_ecbs(
                &inst,
                Objective::Flowtime,
                SuboptimalityBound::new(1.5).unwrap(),
                Some(&set),
            )
            .unwrap();
            assert!(detect_conflicts(&plan, g).unwrap().is_empty());
        }
    }

    #[test]
    fn bound_rejects_below_one() {
        assert!(SuboptimalityBound::new(0.9).is_err());
        assert!(SuboptimalityBound::new(f64::NAN).is_err());
        assert_eq!(SuboptimalityBound::new(1.5).unwrap().scale(4), 6);
        assert_eq!(SuboptimalityBound::new(1.1).unwrap().scale(10), 11);
    }
}
