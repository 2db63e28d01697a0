//! From discrete plans to continuous schedules: temporal plan graph,
//! safety markers, simple temporal network and schedule extraction.

mod augment;
mod schedule;
mod stn;
mod tpg;

pub use augment::{augment_tpg, marked_edges, AugArc, AugNode, AugmentedTpg, EventKind};
pub use schedule::{Schedule, Waypoint, WaypointDoc};
pub use stn::{
    build_stn, solve_stn_earliest, stn_slack, Kinematics, Stn, StnArcKind, StnConstraint, StnEvent,
    ORIGIN,
};
pub use tpg::{build_tpg, ArcKind, Tpg, TpgArc, TpgNode};

use crate::scalar::Scalar;
use crate::world::{DiscretePlan, Graph, WorldError};
use stn::tolerance;

#[derive(Debug, thiserror::Error)]
pub enum PostError {
    #[error("plan has {0} conflicts")]
    Conflicted(usize),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("safety distance {delta} exceeds half the length {length} of edge {from}-{to}")]
    DeltaTooLarge {
        delta: f64,
        length: f64,
        from: String,
        to: String,
    },
    #[error("safety distance {0} must be finite and non-negative")]
    InvalidDelta(f64),
    #[error("invalid kinematics: {0}")]
    InvalidKinematics(String),
    #[error("temporal network is inconsistent: cycle {}", .cycle.join(" -> "))]
    Inconsistent { cycle: Vec<String> },
    #[error("makespan cap {cap} is below the minimum makespan {min}")]
    CapTooTight { cap: f64, min: f64 },
    #[error("schedule violates the temporal network: {0}")]
    InvalidSchedule(String),
}

/// Result of post-processing a plan.
#[derive(Debug, Clone)]
pub struct PostOutput<S: Scalar> {
    pub delta: S,
    pub tpg: Tpg,
    pub augmented: AugmentedTpg<S>,
    pub stn: Stn<S>,
    pub schedule: Schedule<S>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PostMode<S: Scalar> {
    /// Earliest schedule at a fixed safety distance.
    MinMakespan { delta: S },
    /// Largest safety distance whose earliest schedule meets the cap.
    MaxSafety { cap: Option<S>, tolerance: S },
}

/// Build every stage at a fixed `delta`, honoring an optional deadline.
pub fn schedule_at<S: Scalar>(
    tpg: &Tpg,
    delta: S,
    kin: &Kinematics<S>,
    graph: &Graph<S>,
    epsilon: S,
    cap: Option<S>,
) -> Result<PostOutput<S>, PostError> {
    let augmented = augment_tpg(tpg, delta, graph)?;
    let mut stn = build_stn(&augmented, kin, graph, epsilon)?;
    if let Some(cap) = cap {
        stn.add_deadline(cap);
    }
    let schedule = solve_stn_earliest(&stn)?;
    Ok(PostOutput {
        delta,
        tpg: tpg.clone(),
        augmented,
        stn,
        schedule,
    })
}

/// Largest admissible safety distance: half the shortest marked edge, or of
/// the shortest traversed edge if no vertex is shared.
pub fn max_admissible_delta<S: Scalar>(tpg: &Tpg, graph: &Graph<S>) -> S {
    let marked = marked_edges(tpg, graph);
    let lengths: Vec<S> = if marked.is_empty() {
        (0..tpg.num_robots())
            .flat_map(|r| {
                let chain = tpg.chain(crate::world::RobotId(r));
                chain
                    .windows(2)
                    .map(|w| {
                        let (u, v) = (tpg.nodes()[w[0]].location, tpg.nodes()[w[1]].location);
                        graph
                            .edge(graph.edge_between(u, v).expect("plan moves along edges"))
                            .length
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    } else {
        marked.iter().map(|&e| graph.edge(e).length).collect()
    };
    lengths
        .into_iter()
        .reduce(S::min)
        .map_or(S::zero(), |l| l * S::half())
}

/// Binary search for the largest `delta` whose schedule finishes by `cap`.
pub fn maximize_safety<S: Scalar>(
    tpg: &Tpg,
    kin: &Kinematics<S>,
    graph: &Graph<S>,
    epsilon: S,
    cap: Option<S>,
    tolerance: S,
) -> Result<PostOutput<S>, PostError> {
    let base = schedule_at(tpg, S::zero(), kin, graph, epsilon, None)?;
    if let Some(cap) = cap {
        let min = base.schedule.makespan();
        if cap < min {
            return Err(PostError::CapTooTight {
                cap: cap.as_f64(),
                min: min.as_f64(),
            });
        }
    }
    let feasible = |delta: S| match schedule_at(tpg, delta, kin, graph, epsilon, cap) {
        Ok(out) => Ok(Some(out)),
        Err(PostError::Inconsistent { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let mut hi = max_admissible_delta(tpg, graph);
    if let Some(out) = feasible(hi)? {
        return Ok(out);
    }
    let mut lo = S::zero();
    let mut best = feasible(lo)?.expect("cap admits the unaugmented schedule");
    let tolerance = tolerance.max(S::epsilon());
    while hi - lo > tolerance {
        let mid = (lo + hi) * S::half();
        match feasible(mid)? {
            Some(out) => {
                lo = mid;
                best = out;
            }
            None => hi = mid,
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafetyMode {
    #[default]
    MinMakespan,
    MaxSafety,
}

/// One value for every robot, or one per robot in robot order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "T: serde::Serialize + serde::de::DeserializeOwned", untagged)]
pub enum PerRobot<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Clone> PerRobot<T> {
    /// A list shorter than `robots` is returned as is and rejected later.
    pub fn expand(&self, robots: usize) -> Vec<T> {
        match self {
            PerRobot::All(v) => vec![v.clone(); robots],
            PerRobot::Each(list) => list.clone(),
        }
    }
}

/// Post-processing settings.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct PostConfig<S: Scalar> {
    pub delta: S,
    pub epsilon: S,
    pub v_max: PerRobot<S>,
    /// `None` means turning is instantaneous.
    pub omega_max: PerRobot<Option<S>>,
    pub makespan_cap: Option<S>,
    pub mode: SafetyMode,
    pub tolerance: S,
}

impl<S: Scalar> Default for PostConfig<S> {
    fn default() -> Self {
        Self {
            delta: S::zero(),
            epsilon: S::of(0.01),
            v_max: PerRobot::All(S::one()),
            omega_max: PerRobot::All(None),
            makespan_cap: None,
            mode: SafetyMode::MinMakespan,
            tolerance: S::of(1e-3),
        }
    }
}

impl<S: Scalar> PostConfig<S> {
    pub fn kinematics(&self, robots: usize) -> Kinematics<S> {
        let mut omega_max = self.omega_max.expand(robots);
        omega_max.resize(robots, None);
        let mut v_max = self.v_max.expand(robots);
        v_max.truncate(robots);
        Kinematics { v_max, omega_max }
    }

    pub fn mode(&self) -> PostMode<S> {
        match self.mode {
            SafetyMode::MinMakespan => PostMode::MinMakespan { delta: self.delta },
            SafetyMode::MaxSafety => PostMode::MaxSafety {
                cap: self.makespan_cap,
                tolerance: self.tolerance,
            },
        }
    }

    /// In min-makespan mode a cap is checked rather than optimized for.
    pub fn apply(&self, plan: &DiscretePlan, graph: &Graph<S>) -> Result<PostOutput<S>, PostError> {
        let out = post_process(
            plan,
            graph,
            &self.kinematics(plan.num_robots()),
            self.epsilon,
            self.mode(),
        )?;
        if let (SafetyMode::MinMakespan, Some(cap)) = (self.mode, self.makespan_cap) {
            let min = out.schedule.makespan();
            if min > cap + tolerance::<S>() {
                return Err(PostError::CapTooTight {
                    cap: cap.as_f64(),
                    min: min.as_f64(),
                });
            }
        }
        Ok(out)
    }
}

/// Plan to schedule in one call.
pub fn post_process<S: Scalar>(
    plan: &DiscretePlan,
    graph: &Graph<S>,
    kin: &Kinematics<S>,
    epsilon: S,
    mode: PostMode<S>,
) -> Result<PostOutput<S>, PostError> {
    let tpg = build_tpg(plan, graph)?;
    match mode {
        PostMode::MinMakespan { delta } => schedule_at(&tpg, delta, kin, graph, epsilon, None),
        PostMode::MaxSafety { cap, tolerance } => {
            maximize_safety(&tpg, kin, graph, epsilon, cap, tolerance)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{two_team_graph, two_team_plan};

    fn fixture() -> (Graph<f64>, Tpg) {
        let g = two_team_graph::<f64>();
        let tpg = build_tpg(&two_team_plan(&g), &g).unwrap();
        (g, tpg)
    }

    #[test]
    fn unbounded_cap_gives_half_edge() {
        let (g, tpg) = fixture();
        let kin = Kinematics::uniform(3, 1.0, None);
        let out = maximize_safety(&tpg, &kin, &g, 0.01, None, 1e-3).unwrap();
        assert_eq!(out.delta, 0.5);
    }

    #[test]
    fn cap_at_minimum_makespan() {
        let (g, tpg) = fixture();
        let kin = Kinematics::uniform(3, 1.0, None);
        let out = maximize_safety(&tpg, &kin, &g, 0.0, Some(4.0), 1e-3).unwrap();
        assert!(out.delta >= 0.0);
        assert!(out.schedule.makespan() <= 4.0 + 1e-9);
        assert!(matches!(
            maximize_safety(&tpg, &kin, &g, 0.0, Some(3.5), 1e-3),
            Err(PostError::CapTooTight { .. })
        ));
    }

    #[test]
    fn binary_search_matches_linear_scan() {
        let (g, tpg) = fixture();
        let kin = Kinematics::uniform(3, 1.0, None);
        let (eps, cap) = (0.1, 4.5);
        let out = maximize_safety(&tpg, &kin, &g, eps, Some(cap), 1e-3).unwrap();
        let scan = (0..=500)
            .map(|k| k as f64 * 0.001)
            .filter(|&d| schedule_at(&tpg, d, &kin, &g, eps, Some(cap)).is_ok())
            .fold(0.0, f64::max);
        assert!(
            (out.delta - scan).abs() <= 1e-3 + 1e-9,
            "{} vs {scan}",
            out.delta
        );
        assert!(out.schedule.makespan() <= cap + 1e-9);
    }
}
