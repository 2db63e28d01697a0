use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use super::assign::bottleneck_distance;
use super::network::{plan_team_flow, TeamConstraint, TeamConstraintKind, TeamConstraintSet};
use crate::mapf::{
    cycle_moves, joint_plan, joint_reachable, Budget, Objective, PlanError, SearchLimits,
    JOINT_STATES, MERGE_AFTER, REACH_WORK,
};
use crate::scalar::Scalar;
use crate::world::{
    count_conflicts, first_conflict, ConflictKind, DiscretePlan, TapfInstance, VertexId,
};

struct CtNode {
    constraints: Vec<TeamConstraintSet>,
    team_paths: Vec<Vec<Vec<VertexId>>>,
}

impl CtNode {
    fn joint(&self) -> Vec<Vec<VertexId>> {
        self.team_paths.iter().flatten().cloned().collect()
    }
}

/// Makespan lower bound: the largest per-team bottleneck assignment distance.
pub fn makespan_lower_bound<S: Scalar>(instance: &TapfInstance<S>) -> Option<usize> {
    instance
        .teams
        .iter()
        .map(|t| bottleneck_distance(&instance.graph, t))
        .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
}

/// Optimal-makespan target assignment and path finding.
///
/// Iterative deepening on the makespan `T`. For each `T` a conflict tree over
/// team-level constraint sets is searched; every node routes each team by
/// min-cost flow in its time-expanded network and branches on the earliest
/// conflict between robots of different teams.
pub fn plan_cbm<S: Scalar>(instance: &TapfInstance<S>) -> Result<DiscretePlan, PlanError> {
    plan_cbm_with(instance, &SearchLimits::default())
}

pub fn plan_cbm_with<S: Scalar>(
    instance: &TapfInstance<S>,
    limits: &SearchLimits,
) -> Result<DiscretePlan, PlanError> {
    let violations = instance.violations();
    if !violations.is_empty() {
        return Err(PlanError::InvalidInstance(violations));
    }
    let lower = makespan_lower_bound(instance).ok_or(PlanError::Infeasible)?;
    let groups: Vec<_> = instance
        .teams
        .iter()
        .map(|t| (t.starts.clone(), t.targets.clone()))
        .collect();
    if joint_reachable(&instance.graph, &groups, REACH_WORK) == Some(false) {
        return Err(PlanError::Infeasible);
    }
    let cap = instance.graph.num_vertices() * instance.num_robots() + lower;
    let mut budget = Budget::new(limits);
    let mut expanded = 0;
    for makespan in lower..=cap {
        if let Some(plan) = search_makespan(instance, makespan, &mut budget, &mut expanded)? {
            return Ok(plan);
        }
    }
    Err(PlanError::Infeasible)
}

/// Optimal plan with every robot merged into one agent, or `None` if the
/// joint space is too large.
fn merged_plan<S: Scalar>(
    instance: &TapfInstance<S>,
    budget: &mut Budget,
) -> Result<Option<DiscretePlan>, PlanError> {
    let space = (instance.graph.num_vertices() as f64).powi(instance.num_robots() as i32);
    if space > 16.0 * JOINT_STATES as f64 {
        return Ok(None);
    }
    let groups: Vec<_> = instance
        .teams
        .iter()
        .map(|t| (t.starts.clone(), t.targets.clone()))
        .collect();
    let paths = joint_plan(
        &instance.graph,
        &groups,
        Objective::Makespan,
        JOINT_STATES,
        budget,
    )?;
    Ok(paths.map(DiscretePlan::new))
}

fn search_makespan<S: Scalar>(
    instance: &TapfInstance<S>,
    makespan: usize,
    budget: &mut Budget,
    expanded: &mut usize,
) -> Result<Option<DiscretePlan>, PlanError> {
    let graph = &instance.graph;
    let robot_team = instance.robot_teams();
    let empty = TeamConstraintSet::new();
    let mut team_paths = Vec::with_capacity(instance.teams.len());
    for team in &instance.teams {
        match plan_team_flow(graph, team, makespan, &empty) {
            Ok(p) => team_paths.push(p),
            Err(PlanError::Infeasible) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    let root = CtNode {
        constraints: vec![TeamConstraintSet::new(); instance.teams.len()],
        team_paths,
    };
    let mut open = BinaryHeap::new();
    open.push(Reverse((count_conflicts(&root.joint()), 0usize)));
    let mut arena = vec![root];
    let mut seen: HashSet<Vec<TeamConstraintSet>> = HashSet::new();

    while let Some(Reverse((_, id))) = open.pop() {
        budget.tick()?;
        *expanded += 1;
        if *expanded == MERGE_AFTER {
            if let Some(plan) = merged_plan(instance, budget)? {
                return Ok(Some(plan));
            }
        }
        let joint = arena[id].joint();
        let Some(conflict) = first_conflict(&joint) else {
            return Ok(Some(DiscretePlan::new(joint)));
        };
        let (a, b) = conflict.robots;
        let t = conflict.timestep;
        let branches = match conflict.kind {
            ConflictKind::Vertex(v) => vec![
                (robot_team[a.0], TeamConstraintKind::Vertex(v)),
                (robot_team[b.0], TeamConstraintKind::Vertex(v)),
            ],
            ConflictKind::Edge { from, to } => vec![
                (robot_team[a.0], TeamConstraintKind::Edge { from, to }),
                (
                    robot_team[b.0],
                    TeamConstraintKind::Edge { from: to, to: from },
                ),
            ],
            // A rotation may involve one team several times.
            ConflictKind::Cycle { .. } => cycle_moves(&joint, t, a.0)
                .into_iter()
                .map(|(r, from, to)| (robot_team[r], TeamConstraintKind::Edge { from, to }))
                .collect(),
        };
        for (team, kind) in branches {
            let mut constraints = arena[id].constraints.clone();
            constraints[team].insert(TeamConstraint { kind, timestep: t });
            if !seen.insert(constraints.clone()) {
                continue;
            }
            let paths =
                match plan_team_flow(graph, &instance.teams[team], makespan, &constraints[team]) {
                    Ok(p) => p,
                    Err(PlanError::Infeasible) => continue,
                    Err(e) => return Err(e),
                };
            let mut team_paths = arena[id].team_paths.clone();
            team_paths[team] = paths;
            let node = CtNode {
                constraints,
                team_paths,
            };
            open.push(Reverse((count_conflicts(&node.joint()), arena.len())));
            arena.push(node);
        }
        arena[id].team_paths = Vec::new();
    }
    Ok(None)
}
