use crate::mapf::PlanError;
use crate::scalar::Scalar;
use crate::world::{Graph, MapfInstance, RobotSpec, TapfInstance, Team};

/// Fix targets: `assignment[team][i]` is the target index of start `i`.
pub fn tapf_to_mapf<S: Scalar>(
    instance: &TapfInstance<S>,
    assignment: &[Vec<usize>],
) -> Result<MapfInstance<S>, PlanError> {
    if assignment.len() != instance.teams.len() {
        return Err(PlanError::InvalidInput(format!(
            "assignment covers {} teams, instance has {}",
            assignment.len(),
            instance.teams.len()
        )));
    }
    let mut robots = Vec::with_capacity(instance.num_robots());
    for (i, (team, map)) in instance.teams.iter().zip(assignment).enumerate() {
        let mut used = vec![false; team.targets.len()];
        if map.len() != team.starts.len() {
            return Err(PlanError::InvalidInput(format!(
                "assignment for team {i} is not a bijection"
            )));
        }
        for (&start, &k) in team.starts.iter().zip(map) {
            if k >= used.len() || std::mem::replace(&mut used[k], true) {
                return Err(PlanError::InvalidInput(format!(
                    "assignment for team {i} is not a bijection"
                )));
            }
            robots.push(RobotSpec {
                start,
                target: team.targets[k],
            });
        }
    }
    Ok(MapfInstance::new(instance.graph.clone(), robots))
}

fn has_perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> bool {
    fn augment(
        u: usize,
        n: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        matched: &mut [Option<usize>],
    ) -> bool {
        for v in 0..n {
            if allowed(u, v) && !seen[v] {
                seen[v] = true;
                if matched[v].is_none_or(|w| augment(w, n, allowed, seen, matched)) {
                    matched[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut matched = vec![None; n];
    (0..n).all(|u| augment(u, n, &allowed, &mut vec![false; n], &mut matched))
}

/// Smallest `d` such that every start can be matched to a distinct target
/// within `d` hops. `None` if no perfect matching exists at all.
pub fn bottleneck_distance<S: Scalar>(graph: &Graph<S>, team: &Team) -> Option<usize> {
    let n = team.starts.len();
    let dist: Vec<Vec<usize>> = team
        .starts
        .iter()
        .map(|&s| {
            let d = graph.hop_distances(s);
            team.targets.iter().map(|g| d[g.0]).collect()
        })
        .collect();
    let mut levels: Vec<usize> = dist
        .iter()
        .flatten()
        .copied()
        .filter(|&d| d != usize::MAX)
        .collect();
    levels.sort_unstable();
    levels.dedup();
    let feasible = |limit: usize| has_perfect_matching(n, |i, j| dist[i][j] <= limit);
    if n == 0 {
        return Some(0);
    }
    if levels.is_empty() || !feasible(*levels.last().unwrap()) {
        return None;
    }
    let idx = levels.partition_point(|&d| !feasible(d));
    Some(levels[idx])
}
