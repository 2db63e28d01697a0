use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{controller_speed, DelayModel, SimError};
use crate::mapf::{plan_ecbs_with, HighwaySet, Objective, SearchLimits, SuboptimalityBound};
use crate::post::{
    augment_tpg, build_stn, build_tpg, solve_stn_earliest, stn_slack, Kinematics, Schedule, Stn,
    StnArcKind, ORIGIN,
};
use crate::scalar::{Point, Scalar};
use crate::world::{Graph, MapfInstance, RobotId, RobotSpec, VertexId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState<S: Scalar> {
    pub position: Point<S>,
    /// Index of the waypoint being approached in the current schedule.
    pub next: usize,
    pub speed: S,
    pub dwell_left: S,
    pub finished_at: Option<S>,
    /// Most recently reached plan vertex.
    pub last_vertex: VertexId,
    /// Waypoints of schedules replaced by re-planning.
    offset: usize,
}

impl<S: Scalar> RobotState<S> {
    /// Cumulative index of the last waypoint reached.
    pub fn waypoint_index(&self) -> usize {
        (self.offset + self.next).saturating_sub(1)
    }
}

/// Lateness beyond an event's slack calls for recovery. `None` slack is
/// unbounded.
pub fn needs_recovery<S: Scalar>(lateness: S, slack: Option<S>) -> bool {
    slack.is_some_and(|s| lateness > s + S::of(1e-9))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    None,
    StnResolve,
    MapfReplan,
}

/// What re-planning needs besides the current state.
#[derive(Debug, Clone)]
pub struct Replanner<S: Scalar> {
    pub graph: Graph<S>,
    pub targets: Vec<VertexId>,
    pub kinematics: Kinematics<S>,
    pub delta: S,
    pub epsilon: S,
    pub bound: SuboptimalityBound,
    pub highways: Option<HighwaySet>,
    pub limits: SearchLimits,
}

/// Execution state of all robots against the current schedule.
#[derive(Debug, Clone)]
pub struct SimState<S: Scalar> {
    pub clock: S,
    pub robots: Vec<RobotState<S>>,
    pub schedule: Schedule<S>,
    /// Network behind `schedule`, anchored after re-solves.
    pub stn: Stn<S>,
    pub stn_resolves: usize,
    pub replans: usize,
    pub deadline: Option<S>,
    pub deadline_dropped: bool,
    /// Unanchored network of the current plan.
    base: Stn<S>,
    occurred: Vec<Option<S>>,
    preds: Vec<Vec<usize>>,
    seg_speed: Vec<Vec<S>>,
    slack: Option<Vec<Option<S>>>,
    rng: ChaCha8Rng,
    last_resolve: Option<S>,
    tolerance: S,
    resolve_interval: S,
    replanner: Replanner<S>,
}

impl<S: Scalar> SimState<S> {
    pub fn new(
        stn: Stn<S>,
        replanner: Replanner<S>,
        deadline: Option<S>,
        seed: u64,
        tolerance: S,
        resolve_interval: S,
    ) -> Result<Self, SimError> {
        let mut base = stn;
        if let Some(d) = deadline {
            base.add_deadline(d);
        }
        let schedule = solve_stn_earliest(&base).map_err(|_| {
            SimError::InvalidConfig("deadline is below the nominal makespan".into())
        })?;
        let robots = schedule
            .robots()
            .iter()
            .map(|ws| RobotState {
                position: ws[0].position,
                next: 0,
                speed: S::zero(),
                dwell_left: S::zero(),
                finished_at: None,
                last_vertex: ws[0].vertex.expect("chains start at a vertex"),
                offset: 0,
            })
            .collect();
        let mut state = Self {
            clock: S::zero(),
            robots,
            stn: base.clone(),
            schedule,
            stn_resolves: 0,
            replans: 0,
            deadline,
            deadline_dropped: false,
            base,
            occurred: Vec::new(),
            preds: Vec::new(),
            seg_speed: Vec::new(),
            slack: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_resolve: None,
            tolerance,
            resolve_interval,
            replanner,
        };
        state.index_plan();
        state.reach_all(S::zero());
        Ok(state)
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn is_finished(&self) -> bool {
        self.robots
            .iter()
            .zip(self.schedule.robots())
            .all(|(r, ws)| r.next >= ws.len())
    }

    pub fn occurred(&self, event: usize) -> Option<S> {
        self.occurred[event]
    }

    /// Recompute lookups after the schedule's plan changes.
    fn index_plan(&mut self) {
        let n = self.base.events().len();
        self.occurred = vec![None; n];
        self.occurred[ORIGIN] = Some(S::zero());
        self.preds = vec![Vec::new(); n];
        let mut intra: HashMap<(usize, usize), S> = HashMap::new();
        for c in self.base.constraints() {
            match c.kind {
                StnArcKind::Inter => self.preds[c.to].push(c.from),
                StnArcKind::Intra => {
                    intra.insert((c.from, c.to), c.lo);
                }
                _ => {}
            }
        }
        let kin = &self.replanner.kinematics;
        self.seg_speed = self
            .schedule
            .robots()
            .iter()
            .enumerate()
            .map(|(r, ws)| {
                let v_max = kin.v_max[r];
                let mut speeds = vec![v_max];
                for pair in ws.windows(2) {
                    let d = pair[0].position.distance(&pair[1].position);
                    let lo = intra
                        .get(&(pair[0].event, pair[1].event))
                        .copied()
                        .unwrap_or(S::zero())
                        - pair[0].dwell;
                    speeds.push(if lo > S::epsilon() && d > S::zero() {
                        (d / lo).min(v_max)
                    } else {
                        v_max
                    });
                }
                speeds
            })
            .collect();
        self.slack = None;
    }

    fn reach_all(&mut self, now: S) {
        for r in 0..self.robots.len() {
            self.try_reach(r, now);
        }
    }

    fn gate_open(&self, event: usize) -> bool {
        self.preds[event]
            .iter()
            .all(|&p| self.occurred[p].is_some())
    }

    /// Register every waypoint the robot stands on, in order, as long as
    /// their inter-robot predecessors have occurred.
    fn try_reach(&mut self, r: usize, now: S) {
        let len = self.schedule.robot(RobotId(r)).len();
        while self.robots[r].next < len {
            let wp = self.schedule.robot(RobotId(r))[self.robots[r].next];
            if self.robots[r].position.distance(&wp.position) > self.tolerance
                || !self.gate_open(wp.event)
            {
                break;
            }
            let rs = &mut self.robots[r];
            rs.position = wp.position;
            rs.dwell_left = wp.dwell;
            rs.next += 1;
            if let Some(v) = wp.vertex {
                rs.last_vertex = v;
            }
            if rs.next == len {
                rs.finished_at = Some(now);
            }
            self.occurred[wp.event] = Some(now);
            if self.robots[r].dwell_left > S::zero() {
                break;
            }
        }
    }

    /// Advance every robot by one tick. Returns which robots were delayed.
    pub fn step(&mut self, dt: S, delays: &DelayModel<S>) -> Vec<bool> {
        let now = self.clock + dt;
        let mut delayed = vec![false; self.robots.len()];
        for r in 0..self.robots.len() {
            // One draw per robot and tick keeps runs with different delay
            // parameters on common random numbers.
            let draw = S::of(self.rng.gen::<f64>());
            let rs = self.robots[r];
            let Some(&wp) = self.schedule.robot(RobotId(r)).get(rs.next) else {
                self.robots[r].speed = S::zero();
                continue;
            };
            let (factor, is_delayed) = delays.factor(r, self.clock, draw);
            delayed[r] = is_delayed;
            if rs.dwell_left > S::zero() {
                let rs = &mut self.robots[r];
                rs.dwell_left = (rs.dwell_left - dt * factor).max(S::zero());
                rs.speed = S::zero();
            } else {
                let remaining = rs.position.distance(&wp.position);
                let speed = controller_speed(
                    remaining,
                    wp.time - self.clock,
                    self.seg_speed[r][rs.next],
                    dt,
                )
                .expect("distances are non-negative");
                let rs = &mut self.robots[r];
                rs.speed = speed * factor;
                rs.position = rs.position.toward(&wp.position, speed * dt * factor);
            }
            if self.robots[r].dwell_left <= S::zero() {
                self.try_reach(r, now);
            }
        }
        self.clock = now;
        delayed
    }

    /// Earliest time the robot could reach its next waypoint at full speed.
    fn projected(&self, r: usize) -> Option<(usize, S)> {
        let rs = &self.robots[r];
        let wp = self.schedule.robot(RobotId(r)).get(rs.next)?;
        let travel = rs.position.distance(&wp.position) / self.seg_speed[r][rs.next];
        Some((wp.event, self.clock + rs.dwell_left + travel))
    }

    /// Slack of every event. Without a hard deadline the current makespan
    /// serves as a soft one, so lateness on the critical path is noticed.
    pub fn event_slack(&mut self) -> &[Option<S>] {
        if self.slack.is_none() {
            let mut stn = self.stn.clone();
            if self.deadline.is_none() {
                stn.add_deadline(self.schedule.makespan());
            }
            let slack = stn_slack(&stn, &self.schedule)
                .unwrap_or_else(|_| vec![Some(S::zero()); self.stn.events().len()]);
            self.slack = Some(slack);
        }
        self.slack.as_deref().expect("just computed")
    }

    /// Whether any robot's next event is projected later than its slack allows.
    pub fn is_late(&mut self) -> bool {
        let projections: Vec<(usize, S)> = (0..self.robots.len())
            .filter_map(|r| self.projected(r))
            .collect();
        let times = self.schedule.event_times().to_vec();
        let slack = self.event_slack();
        projections
            .into_iter()
            .any(|(e, t)| needs_recovery(t - times[e], slack[e]))
    }

    /// Absorb, re-solve or re-plan. `Err` is an unrecoverable failure.
    pub fn monitor_and_recover(&mut self) -> Result<Action, String> {
        if self.is_finished() {
            return Ok(Action::None);
        }
        if !self.is_late() {
            return Ok(Action::None);
        }
        if let Some(last) = self.last_resolve {
            if self.clock - last < self.resolve_interval {
                return Ok(Action::None);
            }
        }
        self.last_resolve = Some(self.clock);
        if self.resolve() {
            self.stn_resolves += 1;
            return Ok(Action::StnResolve);
        }
        self.replan()?;
        self.replans += 1;
        Ok(Action::MapfReplan)
    }

    /// Re-solve the plan's network anchored at what has happened so far.
    pub fn resolve(&mut self) -> bool {
        let mut stn = self.base.clone();
        let occurred = &self.occurred;
        stn.retain_constraints(|c| c.to == ORIGIN || occurred[c.to].is_none());
        for (e, t) in occurred.iter().enumerate().skip(1) {
            if let Some(t) = *t {
                stn.add_constraint(ORIGIN, e, t, Some(t));
            }
        }
        for r in 0..self.robots.len() {
            if let Some((e, t)) = self.projected(r) {
                stn.add_constraint(ORIGIN, e, t, None);
            }
        }
        match solve_stn_earliest(&stn) {
            Ok(schedule) => {
                self.schedule = schedule;
                self.stn = stn;
                self.slack = None;
                true
            }
            Err(_) => false,
        }
    }

    /// Plan again from each robot's next vertex and splice the result in.
    fn replan(&mut self) -> Result<(), String> {
        let n = self.robots.len();
        let mut start = Vec::with_capacity(n);
        let mut tail = Vec::with_capacity(n);
        let mut settled = Vec::with_capacity(n);
        for r in 0..n {
            let ws = self.schedule.robot(RobotId(r));
            let rs = &self.robots[r];
            let here = graph_vertex_at(
                &self.replanner.graph,
                rs.last_vertex,
                rs.position,
                self.tolerance,
            );
            if rs.next >= ws.len() || here {
                start.push(rs.last_vertex);
                tail.push(rs.last_vertex);
                settled.push(true);
            } else {
                let head = ws[rs.next..]
                    .iter()
                    .find_map(|w| w.vertex)
                    .expect("chains end at a vertex");
                start.push(head);
                tail.push(rs.last_vertex);
                settled.push(false);
            }
        }
        // Two robots heading for the same vertex: the one further away backs
        // up to the vertex it came from.
        for _ in 0..n * n + 1 {
            let clash = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .find(|&(a, b)| start[a] == start[b]);
            let Some((a, b)) = clash else { break };
            let movable = |r: usize| !settled[r] && tail[r] != start[r];
            let dist = |r: usize| {
                self.robots[r]
                    .position
                    .distance(&self.replanner.graph.position(start[r]))
            };
            let pick = match (movable(a), movable(b)) {
                (true, true) => {
                    if dist(a) > dist(b) {
                        a
                    } else {
                        b
                    }
                }
                (true, false) => a,
                (false, true) => b,
                (false, false) => {
                    return Err(format!(
                        "robots {a} and {b} cannot be separated at {}",
                        self.replanner.graph.name(start[a])
                    ))
                }
            };
            start[pick] = tail[pick];
            settled[pick] = true;
        }

        let rp = &self.replanner;
        let robots = start
            .iter()
            .zip(&rp.targets)
            .map(|(&s, &t)| RobotSpec {
                start: s,
                target: t,
            })
            .collect();
        let instance = MapfInstance::new(rp.graph.clone(), robots);
        let plan = plan_ecbs_with(
            &instance,
            Objective::Makespan,
            rp.bound,
            rp.highways.as_ref(),
            &rp.limits,
        )
        .map_err(|e| format!("re-planning failed: {e}"))?;
        let tpg = build_tpg(&plan, &rp.graph).map_err(|e| e.to_string())?;
        let aug = augment_tpg(&tpg, rp.delta, &rp.graph).map_err(|e| e.to_string())?;
        let mut stn =
            build_stn(&aug, &rp.kinematics, &rp.graph, rp.epsilon).map_err(|e| e.to_string())?;
        for r in 0..n {
            let first = stn.chain(RobotId(r))[0];
            let travel = self.robots[r]
                .position
                .distance(&rp.graph.position(start[r]))
                / rp.kinematics.v_max[r];
            stn.add_constraint(ORIGIN, first, self.clock + travel, None);
        }
        let mut schedule = None;
        if let Some(d) = self.deadline {
            let mut with = stn.clone();
            with.add_deadline(d);
            if let Ok(s) = solve_stn_earliest(&with) {
                schedule = Some(s);
                stn = with;
            } else {
                self.deadline = None;
                self.deadline_dropped = true;
            }
        }
        let schedule = match schedule {
            Some(s) => s,
            None => solve_stn_earliest(&stn).map_err(|e| e.to_string())?,
        };

        for (r, rs) in self.robots.iter_mut().enumerate() {
            rs.offset += self.schedule.robot(RobotId(r)).len();
            rs.next = 0;
            rs.dwell_left = S::zero();
            if schedule.robot(RobotId(r)).len() > 1 || !settled[r] || start[r] != rs.last_vertex {
                rs.finished_at = None;
            }
        }
        self.schedule = schedule;
        self.base = stn.clone();
        self.stn = stn;
        self.index_plan();
        self.last_resolve = Some(self.clock);
        let now = self.clock;
        for r in 0..n {
            let keep = self.robots[r].finished_at;
            self.try_reach(r, now);
            if keep.is_some() {
                self.robots[r].finished_at = keep;
            }
        }
        Ok(())
    }
}

fn graph_vertex_at<S: Scalar>(graph: &Graph<S>, v: VertexId, p: Point<S>, tol: S) -> bool {
    graph.position(v).distance(&p) <= tol
}
