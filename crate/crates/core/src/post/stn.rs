use std::collections::VecDeque;
use std::fmt::Write;

use super::augment::{AugmentedTpg, EventKind};
use super::schedule::{Schedule, Waypoint};
use super::tpg::ArcKind;
use super::PostError;
use crate::scalar::{heading_change, Point, Scalar};
use crate::world::{Graph, RobotId, VertexId};

/// Velocity limits per robot. `omega_max = None` means rotation is free.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics<S: Scalar> {
    pub v_max: Vec<S>,
    pub omega_max: Vec<Option<S>>,
}

impl<S: Scalar> Kinematics<S> {
    pub fn uniform(robots: usize, v_max: S, omega_max: Option<S>) -> Self {
        Self {
            v_max: vec![v_max; robots],
            omega_max: vec![omega_max; robots],
        }
    }

    pub fn validate(&self) -> Result<(), PostError> {
        for (r, &v) in self.v_max.iter().enumerate() {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(PostError::InvalidKinematics(format!(
                    "robot {r}: v_max {v} must be positive"
                )));
            }
        }
        for (r, w) in self.omega_max.iter().enumerate() {
            if let Some(w) = w {
                if !(*w > S::zero()) {
                    return Err(PostError::InvalidKinematics(format!(
                        "robot {r}: omega_max {w} must be positive"
                    )));
                }
            }
        }
        if self.v_max.len() != self.omega_max.len() {
            return Err(PostError::InvalidKinematics(
                "per-robot lists differ in length".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StnArcKind {
    /// Origin before a robot's first event.
    Start,
    Intra,
    Inter,
    /// Added after construction: deadlines, anchors.
    Extra,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StnConstraint<S: Scalar> {
    pub from: usize,
    pub to: usize,
    pub lo: S,
    /// `None` is unbounded.
    pub hi: Option<S>,
    pub kind: StnArcKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StnEvent<S: Scalar> {
    /// `None` for the origin.
    pub robot: Option<RobotId>,
    pub kind: Option<EventKind>,
    pub position: Point<S>,
    /// Turn-in-place time before leaving this event.
    pub dwell: S,
    /// Index in the robot's chain.
    pub index: usize,
}

/// Simple temporal network. Event 0 is the origin `X0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stn<S: Scalar> {
    events: Vec<StnEvent<S>>,
    constraints: Vec<StnConstraint<S>>,
    chains: Vec<Vec<usize>>,
}

pub const ORIGIN: usize = 0;

pub(crate) fn tolerance<S: Scalar>() -> S {
    S::epsilon() * S::of(1e4)
}

impl<S: Scalar> Stn<S> {
    pub fn events(&self) -> &[StnEvent<S>] {
        &self.events
    }

    pub fn constraints(&self) -> &[StnConstraint<S>] {
        &self.constraints
    }

    pub fn num_robots(&self) -> usize {
        self.chains.len()
    }

    /// Event ids of one robot in order.
    pub fn chain(&self, robot: RobotId) -> &[usize] {
        &self.chains[robot.0]
    }

    pub fn last_event(&self, robot: RobotId) -> usize {
        *self.chains[robot.0].last().expect("chains are non-empty")
    }

    pub fn add_constraint(&mut self, from: usize, to: usize, lo: S, hi: Option<S>) {
        self.constraints.push(StnConstraint {
            from,
            to,
            lo,
            hi,
            kind: StnArcKind::Extra,
        });
    }

    pub(crate) fn retain_constraints(&mut self, keep: impl FnMut(&StnConstraint<S>) -> bool) {
        self.constraints.retain(keep);
    }

    /// Every robot finishes by `cap`.
    pub fn add_deadline(&mut self, cap: S) {
        for r in 0..self.chains.len() {
            let last = self.last_event(RobotId(r));
            self.add_constraint(ORIGIN, last, S::zero(), Some(cap));
        }
    }

    pub fn has_finite_uppers(&self) -> bool {
        self.constraints.iter().any(|c| c.hi.is_some())
    }

    pub fn label(&self, event: usize) -> String {
        match self.events[event].robot {
            None => "X0".to_string(),
            Some(r) => format!("r{}.{}", r.0, self.events[event].index),
        }
    }

    /// One `a b lo hi` line per constraint.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            let hi = c.hi.map_or("inf".to_string(), |h| h.to_string());
            let _ = writeln!(
                out,
                "{} {} {} {}",
                self.label(c.from),
                self.label(c.to),
                c.lo,
                hi
            );
        }
        out
    }

    /// Earliest consistent time of every event, or a positive cycle of the
    /// longest-path relaxation as a certificate of inconsistency.
    pub fn earliest_times(&self) -> Result<Vec<S>, Vec<usize>> {
        let n = self.events.len();
        if !self.has_finite_uppers() && self.constraints.iter().all(|c| c.lo >= S::zero()) {
            let arcs = self.constraints.iter().map(|c| (c.from, c.to));
            if let Some(order) = super::tpg::topological_order(n, arcs) {
                let mut incoming = vec![Vec::new(); n];
                for c in &self.constraints {
                    incoming[c.to].push((c.from, c.lo));
                }
                let mut t = vec![S::zero(); n];
                for v in order {
                    for &(u, lo) in &incoming[v] {
                        t[v] = t[v].max(t[u] + lo);
                    }
                }
                return Ok(t);
            }
        }
        let mut edges = vec![Vec::new(); n];
        for c in &self.constraints {
            edges[c.from].push((c.to, c.lo));
            if let Some(hi) = c.hi {
                edges[c.to].push((c.from, -hi));
            }
        }
        longest_paths(&edges, ORIGIN)
            .map(|t| t.into_iter().map(|x| x.unwrap_or(S::zero())).collect())
    }

    /// Check `lo <= t(b) - t(a) <= hi` for every constraint.
    pub fn check_times(&self, times: &[S], tol: S) -> Result<(), PostError> {
        if times.len() != self.events.len() {
            return Err(PostError::InvalidSchedule("event count differs".into()));
        }
        if times[ORIGIN].abs() > tol {
            return Err(PostError::InvalidSchedule(
                "origin is not at time zero".into(),
            ));
        }
        for c in &self.constraints {
            let d = times[c.to] - times[c.from];
            if d < c.lo - tol || c.hi.is_some_and(|h| d > h + tol) {
                return Err(PostError::InvalidSchedule(format!(
                    "{} -> {}: difference {d} outside [{}, {}]",
                    self.label(c.from),
                    self.label(c.to),
                    c.lo,
                    c.hi.map_or("inf".to_string(), |h| h.to_string())
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn schedule_from(&self, times: Vec<S>) -> Schedule<S> {
        let robots = self
            .chains
            .iter()
            .map(|chain| {
                chain
                    .iter()
                    .map(|&e| {
                        let ev = self.events[e];
                        Waypoint {
                            position: ev.position,
                            time: times[e],
                            event: e,
                            vertex: match ev.kind {
                                Some(EventKind::Arrival(v)) => Some(v),
                                _ => None,
                            },
                            dwell: ev.dwell,
                        }
                    })
                    .collect()
            })
            .collect();
        Schedule::new(robots, times)
    }
}

/// Longest paths from `source`; `None` for unreachable vertices.
/// A positive cycle reachable from `source` is returned as `Err`.
fn longest_paths<S: Scalar>(
    edges: &[Vec<(usize, S)>],
    source: usize,
) -> Result<Vec<Option<S>>, Vec<usize>> {
    let n = edges.len();
    let tol = tolerance::<S>();
    let mut dist: Vec<Option<S>> = vec![None; n];
    let mut pred = vec![usize::MAX; n];
    let mut count = vec![0usize; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::from([source]);
    dist[source] = Some(S::zero());
    queued[source] = true;
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        let du = dist[u].expect("queued vertices are reached");
        for &(v, w) in &edges[u] {
            let cand = du + w;
            if dist[v].is_none_or(|dv| cand > dv + tol * (S::one() + dv.abs())) {
                dist[v] = Some(cand);
                pred[v] = u;
                count[v] += 1;
                if count[v] > n {
                    return Err(extract_cycle(&pred, v));
                }
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(dist)
}

fn extract_cycle(pred: &[usize], start: usize) -> Vec<usize> {
    let mut v = start;
    for _ in 0..pred.len() {
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut u = pred[v];
    while u != v {
        cycle.push(u);
        u = pred[u];
    }
    cycle.reverse();
    cycle
}

/// Attach durations to the augmented TPG.
///
/// An intra arc covering `d` meters gets `d / min(v_max, speed limit)`, plus
/// `dtheta / omega_max` when it is the first arc after a turn. Inter arcs get
/// `[epsilon, inf)`.
pub fn build_stn<S: Scalar>(
    aug: &AugmentedTpg<S>,
    kin: &Kinematics<S>,
    graph: &Graph<S>,
    epsilon: S,
) -> Result<Stn<S>, PostError> {
    kin.validate()?;
    if kin.v_max.len() < aug.num_robots() {
        return Err(PostError::InvalidKinematics(format!(
            "{} robots but kinematics for {}",
            aug.num_robots(),
            kin.v_max.len()
        )));
    }
    if !(epsilon >= S::zero()) {
        return Err(PostError::InvalidKinematics(format!(
            "epsilon {epsilon} must be non-negative"
        )));
    }
    let mut events = vec![StnEvent {
        robot: None,
        kind: None,
        position: Point::new(S::zero(), S::zero()),
        dwell: S::zero(),
        index: 0,
    }];
    let mut chains = Vec::with_capacity(aug.num_robots());
    for r in 0..aug.num_robots() {
        let chain = aug.chain(RobotId(r));
        let arrivals: Vec<VertexId> = chain
            .iter()
            .filter_map(|&n| match aug.nodes()[n].kind {
                EventKind::Arrival(v) => Some(v),
                _ => None,
            })
            .collect();
        let mut ids = Vec::with_capacity(chain.len());
        let mut hop = 0;
        for (i, &n) in chain.iter().enumerate() {
            let node = aug.nodes()[n];
            let mut dwell = S::zero();
            if let EventKind::Arrival(_) = node.kind {
                if hop > 0 && hop + 1 < arrivals.len() {
                    let turn =
                        turn_angle(graph, arrivals[hop - 1], arrivals[hop], arrivals[hop + 1]);
                    if let Some(w) = kin.omega_max[r] {
                        dwell = turn / w;
                    }
                }
                hop += 1;
            }
            ids.push(events.len());
            events.push(StnEvent {
                robot: Some(node.robot),
                kind: Some(node.kind),
                position: node.position,
                dwell,
                index: i,
            });
        }
        chains.push(ids);
    }
    // Aug node `n` is STN event `n + 1` because nodes are pushed chain by chain.
    let mut event_of = vec![0; aug.nodes().len()];
    for (r, chain) in chains.iter().enumerate() {
        for (i, &e) in chain.iter().enumerate() {
            event_of[aug.chain(RobotId(r))[i]] = e;
        }
    }

    let mut constraints = Vec::new();
    for chain in &chains {
        constraints.push(StnConstraint {
            from: ORIGIN,
            to: chain[0],
            lo: S::zero(),
            hi: None,
            kind: StnArcKind::Start,
        });
    }
    for arc in aug.arcs() {
        let (from, to) = (event_of[arc.from], event_of[arc.to]);
        let lo = match arc.kind {
            ArcKind::Inter => epsilon,
            ArcKind::Intra => {
                let r = aug.nodes()[arc.from].robot.0;
                let limit = arc.edge.and_then(|e| graph.edge(e).speed_limit);
                let v = limit.map_or(kin.v_max[r], |l| l.min(kin.v_max[r]));
                arc.length / v + events[from].dwell
            }
        };
        constraints.push(StnConstraint {
            from,
            to,
            lo,
            hi: None,
            kind: match arc.kind {
                ArcKind::Intra => StnArcKind::Intra,
                ArcKind::Inter => StnArcKind::Inter,
            },
        });
    }
    Ok(Stn {
        events,
        constraints,
        chains,
    })
}

fn turn_angle<S: Scalar>(graph: &Graph<S>, a: VertexId, b: VertexId, c: VertexId) -> S {
    let (pa, pb, pc) = (graph.position(a), graph.position(b), graph.position(c));
    match (pa.heading_to(&pb), pb.heading_to(&pc)) {
        (Some(h1), Some(h2)) => heading_change(h1, h2),
        _ => S::zero(),
    }
}

/// Earliest-time schedule; minimizes every event time at once.
pub fn solve_stn_earliest<S: Scalar>(stn: &Stn<S>) -> Result<Schedule<S>, PostError> {
    let times = stn
        .earliest_times()
        .map_err(|cycle| PostError::Inconsistent {
            cycle: cycle.iter().map(|&e| stn.label(e)).collect(),
        })?;
    Ok(stn.schedule_from(times))
}

/// How long each event may slip, all others free to move later only.
/// `None` means unbounded.
pub fn stn_slack<S: Scalar>(
    stn: &Stn<S>,
    schedule: &Schedule<S>,
) -> Result<Vec<Option<S>>, PostError> {
    let times = schedule.event_times();
    stn.check_times(times, S::of(1e-9).max(tolerance::<S>() * S::of(100.0)))?;
    let n = stn.events.len();
    // Shortest paths in the distance graph, negated to reuse the longest-path
    // routine: edge weights flip sign and so do the distances.
    let mut edges = vec![Vec::new(); n];
    for c in &stn.constraints {
        if let Some(hi) = c.hi {
            edges[c.from].push((c.to, -hi));
        }
        edges[c.to].push((c.from, c.lo));
    }
    for (e, &t) in times.iter().enumerate().skip(1) {
        edges[e].push((ORIGIN, t));
    }
    let latest = longest_paths(&edges, ORIGIN).map_err(|cycle| PostError::Inconsistent {
        cycle: cycle.iter().map(|&e| stn.label(e)).collect(),
    })?;
    Ok(latest
        .into_iter()
        .zip(times)
        .map(|(d, &t)| d.map(|d| (-d - t).max(S::zero())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{two_team_graph, two_team_plan};
    use crate::post::{augment_tpg, build_tpg};
    use crate::world::{DiscretePlan, GraphBuilder};

    fn line(limit: Option<f64>) -> Graph<f64> {
        let mut b = GraphBuilder::new();
        let a = b.vertex("a", 0.0, 0.0);
        let c = b.vertex("b", 1.0, 0.0);
        let d = b.vertex("c", 1.0, 1.0);
        b.edge_with_limit(a, c, 1.0, limit);
        b.edge(c, d, 1.0);
        b.build().unwrap()
    }

    fn stn_for(
        g: &Graph<f64>,
        paths: Vec<Vec<usize>>,
        kin: &Kinematics<f64>,
        delta: f64,
        eps: f64,
    ) -> Stn<f64> {
        let plan = DiscretePlan::new(
            paths
                .into_iter()
                .map(|p| p.into_iter().map(VertexId).collect())
                .collect(),
        );
        let tpg = build_tpg(&plan, g).unwrap();
        build_stn(&augment_tpg(&tpg, delta, g).unwrap(), kin, g, eps).unwrap()
    }

    fn intra_lows(stn: &Stn<f64>) -> Vec<f64> {
        stn.constraints()
            .iter()
            .filter(|c| c.kind == StnArcKind::Intra)
            .map(|c| c.lo)
            .collect()
    }

    #[test]
    fn unit_edge_duration() {
        let g = line(None);
        let stn = stn_for(
            &g,
            vec![vec![0, 1]],
            &Kinematics::uniform(1, 1.0, None),
            0.0,
            0.0,
        );
        assert_eq!(intra_lows(&stn), vec![1.0]);
        let stn = stn_for(
            &g,
            vec![vec![0, 1]],
            &Kinematics::uniform(1, 0.5, None),
            0.0,
            0.0,
        );
        assert_eq!(intra_lows(&stn), vec![2.0]);
    }

    #[test]
    fn speed_limit_caps_velocity() {
        let g = line(Some(0.25));
        let stn = stn_for(
            &g,
            vec![vec![0, 1]],
            &Kinematics::uniform(1, 1.0, None),
            0.0,
            0.0,
        );
        assert_eq!(intra_lows(&stn), vec![4.0]);
    }

    #[test]
    fn right_angle_turn_adds_rotation() {
        let g = line(None);
        let kin = Kinematics::uniform(1, 1.0, Some(std::f64::consts::FRAC_PI_2));
        let stn = stn_for(&g, vec![vec![0, 1, 2]], &kin, 0.0, 0.0);
        let lows = intra_lows(&stn);
        assert_eq!(lows[0], 1.0);
        assert!((lows[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn known_plan_makespan() {
        let g = two_team_graph::<f64>();
        let tpg = build_tpg(&two_team_plan(&g), &g).unwrap();
        let aug = augment_tpg(&tpg, 0.0, &g).unwrap();
        let stn = build_stn(&aug, &Kinematics::uniform(3, 1.0, None), &g, 0.0).unwrap();
        let s = solve_stn_earliest(&stn).unwrap();
        assert_eq!(s.makespan(), 4.0);
        assert_eq!(s.robot(RobotId(0)).last().unwrap().time, 4.0);
        stn.check_times(s.event_times(), 1e-9).unwrap();

        let slow = build_stn(&aug, &Kinematics::uniform(3, 0.5, None), &g, 0.0).unwrap();
        let s2 = solve_stn_earliest(&slow).unwrap();
        for (a, b) in s.event_times().iter().zip(s2.event_times()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_below_lower_is_inconsistent() {
        let g = line(None);
        let mut stn = stn_for(
            &g,
            vec![vec![0, 1]],
            &Kinematics::uniform(1, 1.0, None),
            0.0,
            0.0,
        );
        let c = stn.chain(RobotId(0)).to_vec();
        stn.add_constraint(c[0], c[1], 0.0, Some(0.5));
        match solve_stn_earliest(&stn) {
            Err(PostError::Inconsistent { cycle }) => assert!(!cycle.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slack_under_cap() {
        let g = two_team_graph::<f64>();
        let tpg = build_tpg(&two_team_plan(&g), &g).unwrap();
        let aug = augment_tpg(&tpg, 0.0, &g).unwrap();
        let mut stn = build_stn(&aug, &Kinematics::uniform(3, 1.0, None), &g, 0.0).unwrap();
        stn.add_deadline(5.0);
        let s = solve_stn_earliest(&stn).unwrap();
        let slack = stn_slack(&stn, &s).unwrap();
        let h = stn.last_event(RobotId(0));
        assert!((slack[h].unwrap() - 1.0).abs() < 1e-9);

        let free = build_stn(&aug, &Kinematics::uniform(3, 1.0, None), &g, 0.0).unwrap();
        let s = solve_stn_earliest(&free).unwrap();
        let slack = stn_slack(&free, &s).unwrap();
        assert_eq!(slack[free.last_event(RobotId(0))], None);
    }

    #[test]
    fn slack_zero_on_binding_chain() {
        let g = two_team_graph::<f64>();
        let tpg = build_tpg(&two_team_plan(&g), &g).unwrap();
        let aug = augment_tpg(&tpg, 0.0, &g).unwrap();
        let mut stn = build_stn(&aug, &Kinematics::uniform(3, 1.0, None), &g, 0.0).unwrap();
        stn.add_deadline(4.0);
        let s = solve_stn_earliest(&stn).unwrap();
        let slack = stn_slack(&stn, &s).unwrap();
        for &e in stn.chain(RobotId(0)) {
            assert!(slack[e].unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn dump_lists_every_constraint() {
        let g = line(None);
        let stn = stn_for(
            &g,
            vec![vec![0, 1]],
            &Kinematics::uniform(1, 1.0, None),
            0.0,
            0.0,
        );
        assert_eq!(stn.dump(), "X0 r0.0 0 inf\nr0.0 r0.1 1 inf\n");
    }

    #[test]
    fn rejects_bad_velocity() {
        let g = line(None);
        let plan = DiscretePlan::new(vec![vec![VertexId(0), VertexId(1)]]);
        let tpg = build_tpg(&plan, &g).unwrap();
        let aug = augment_tpg(&tpg, 0.0, &g).unwrap();
        assert!(build_stn(&aug, &Kinematics::uniform(1, 0.0, None), &g, 0.0).is_err());
        assert!(build_stn(&aug, &Kinematics::uniform(1, 1.0, Some(-1.0)), &g, 0.0).is_err());
    }
}
