//! Discrete-time execution of schedules under delays, with a recovery
//! ladder: absorb lateness in slack, re-solve the temporal network, or
//! re-plan the remaining paths.

mod delay;
mod state;

pub use delay::{DelayModel, DelayOverride, Stop};
pub use state::{needs_recovery, Action, Replanner, RobotState, SimState};

use serde::{Deserialize, Serialize};

use crate::mapf::PlanError;
use crate::planner::{plan_problem, Planned, PlannerConfig};
use crate::post::{PostConfig, PostError, PostOutput};
use crate::scalar::Scalar;
use crate::world::Problem;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Post(#[from] PostError),
    #[error("invalid simulation settings: {0}")]
    InvalidConfig(String),
}

/// Speed that reaches the next waypoint exactly on time, capped at `v_max`.
/// A robot that is already late drives at `v_max`.
pub fn controller_speed<S: Scalar>(
    remaining: S,
    time_to_go: S,
    v_max: S,
    dt: S,
) -> Result<S, SimError> {
    if !(remaining >= S::zero()) {
        return Err(SimError::InvalidConfig(format!(
            "negative remaining distance {remaining}"
        )));
    }
    if remaining == S::zero() {
        return Ok(S::zero());
    }
    if time_to_go <= S::zero() {
        return Ok(v_max);
    }
    Ok((remaining / time_to_go.max(dt)).max(S::zero()).min(v_max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct SimConfig<S: Scalar> {
    pub dt: S,
    /// Distance at which a waypoint counts as reached.
    pub tolerance: S,
    pub max_ticks: usize,
    /// Minimum simulated time between two network re-solves.
    pub resolve_interval: S,
    /// Hard makespan deadline in seconds.
    pub deadline: Option<S>,
    /// Hard deadline as a multiple of the nominal makespan.
    pub deadline_factor: Option<S>,
    pub seed: u64,
    pub delay: DelayModel<S>,
}

impl<S: Scalar> Default for SimConfig<S> {
    fn default() -> Self {
        Self {
            dt: S::of(0.05),
            tolerance: S::of(1e-3),
            max_ticks: 200_000,
            resolve_interval: S::one(),
            deadline: None,
            deadline_factor: None,
            seed: 0,
            delay: DelayModel::none(),
        }
    }
}

impl<S: Scalar> SimConfig<S> {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > S::zero()) || !self.dt.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "dt {} must be positive",
                self.dt
            )));
        }
        if !(self.tolerance > S::zero()) {
            return Err(SimError::InvalidConfig("tolerance must be positive".into()));
        }
        self.delay.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Metrics<S: Scalar> {
    /// Simulated execution time until every robot finished.
    pub runtime_s: S,
    /// `None` with fewer than two robots.
    pub min_pairwise_distance_m: Option<S>,
    pub avg_time_to_target_s: S,
    pub stn_resolves: usize,
    pub replans: usize,
    /// Ticks closer than the safety distance minus one tick of travel.
    pub safety_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TrajectoryRecord<S: Scalar> {
    pub t: S,
    pub robot: usize,
    pub x: S,
    pub y: S,
    pub waypoint_index: usize,
    pub delayed: bool,
}

#[derive(Debug, Clone)]
pub struct SimReport<S: Scalar> {
    pub metrics: Metrics<S>,
    pub log: Vec<TrajectoryRecord<S>>,
    /// Why execution stopped early, if it did.
    pub failure: Option<String>,
    pub deadline_dropped: bool,
    /// Makespan of the schedule before execution.
    pub nominal_makespan: S,
}

fn min_distance<S: Scalar>(state: &SimState<S>) -> Option<S> {
    let mut best: Option<S> = None;
    for i in 0..state.robots.len() {
        for j in i + 1..state.robots.len() {
            let d = state.robots[i].position.distance(&state.robots[j].position);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

fn record<S: Scalar>(state: &SimState<S>, delayed: &[bool], log: &mut Vec<TrajectoryRecord<S>>) {
    for (r, rs) in state.robots.iter().enumerate() {
        log.push(TrajectoryRecord {
            t: state.clock,
            robot: r,
            x: rs.position.x,
            y: rs.position.y,
            waypoint_index: rs.waypoint_index(),
            delayed: delayed[r],
        });
    }
}

/// Execute a post-processed plan to completion.
pub fn simulate<S: Scalar>(
    planned: &Planned<S>,
    post: &PostOutput<S>,
    planner: &PlannerConfig,
    post_config: &PostConfig<S>,
    config: &SimConfig<S>,
) -> Result<SimReport<S>, SimError> {
    config.validate()?;
    let robots = planned.plan.num_robots();
    let kinematics = post_config.kinematics(robots);
    let nominal = post.schedule.makespan();
    let deadline = config
        .deadline
        .or(config.deadline_factor.map(|f| nominal * f));
    let replanner = Replanner {
        graph: planned.assigned.graph.clone(),
        targets: planned.assigned.targets(),
        kinematics: kinematics.clone(),
        delta: post.delta,
        epsilon: post_config.epsilon,
        bound: planner.bound,
        highways: planned.highways.clone(),
        limits: planner.limits(),
    };
    let mut state = SimState::new(
        post.stn.clone(),
        replanner,
        deadline,
        config.seed,
        config.tolerance,
        config.resolve_interval,
    )?;
    let v_max = kinematics.v_max.iter().copied().fold(S::zero(), S::max);
    let safe = post.delta - v_max * config.dt;
    let mut log = Vec::new();
    record(&state, &vec![false; robots], &mut log);
    let mut closest = min_distance(&state);
    let mut violations = 0;
    let mut failure = None;
    let mut ticks = 0;
    while !state.is_finished() {
        if ticks == config.max_ticks {
            failure = Some(format!(
                "execution did not finish within {} ticks",
                config.max_ticks
            ));
            break;
        }
        ticks += 1;
        let delayed = state.step(config.dt, &config.delay);
        record(&state, &delayed, &mut log);
        if let Some(d) = min_distance(&state) {
            closest = Some(closest.map_or(d, |c| c.min(d)));
            if state.replans == 0 && d < safe - S::of(1e-9) {
                violations += 1;
            }
        }
        if let Err(e) = state.monitor_and_recover() {
            failure = Some(e);
            break;
        }
    }
    let total = state
        .robots
        .iter()
        .map(|r| r.finished_at.unwrap_or(state.clock))
        .fold(S::zero(), |a, b| a + b);
    let metrics = Metrics {
        runtime_s: state.clock,
        min_pairwise_distance_m: closest,
        avg_time_to_target_s: if robots == 0 {
            S::zero()
        } else {
            total / S::of_usize(robots)
        },
        stn_resolves: state.stn_resolves,
        replans: state.replans,
        safety_violations: violations,
    };
    Ok(SimReport {
        metrics,
        log,
        failure,
        deadline_dropped: state.deadline_dropped,
        nominal_makespan: nominal,
    })
}

/// Plan, post-process and execute.
pub fn run<S: Scalar>(
    problem: &Problem<S>,
    planner: &PlannerConfig,
    post_config: &PostConfig<S>,
    config: &SimConfig<S>,
) -> Result<SimReport<S>, SimError> {
    let planned = plan_problem(problem, planner)?;
    let post = post_config.apply(&planned.plan, &planned.assigned.graph)?;
    simulate(&planned, &post, planner, post_config, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_team_instance;
    use crate::planner::Algorithm;
    use crate::world::RobotId;

    #[test]
    fn controller() {
        assert_eq!(controller_speed(1.0, 2.0, 1.0, 0.05).unwrap(), 0.5);
        assert_eq!(controller_speed(2.0, 1.0, 1.0, 0.05).unwrap(), 1.0);
        assert_eq!(controller_speed(0.0, 3.0, 1.0, 0.05).unwrap(), 0.0);
        assert_eq!(controller_speed(0.5, -1.0, 0.8, 0.05).unwrap(), 0.8);
        assert!(controller_speed(-0.1, 1.0, 1.0, 0.05).is_err());
    }

    fn fixture(post: PostConfig<f64>) -> (Problem<f64>, PlannerConfig, PostConfig<f64>) {
        let planner = PlannerConfig {
            algorithm: Algorithm::Cbm,
            ..PlannerConfig::default()
        };
        (Problem::Tapf(two_team_instance()), planner, post)
    }

    fn safe_post() -> PostConfig<f64> {
        PostConfig {
            delta: 0.2,
            epsilon: 0.1,
            ..PostConfig::default()
        }
    }

    #[test]
    fn undelayed_run_is_safe_and_on_time() {
        let (p, planner, post) = fixture(safe_post());
        let report = run(&p, &planner, &post, &SimConfig::default()).unwrap();
        assert!(report.failure.is_none());
        assert!(report.metrics.min_pairwise_distance_m.unwrap() >= 0.2 - 1e-6);
        assert_eq!(report.metrics.replans, 0);
        assert_eq!(report.metrics.safety_violations, 0);
        assert!((report.metrics.runtime_s - report.nominal_makespan).abs() <= 0.05 + 1e-9);
    }

    #[test]
    fn arrivals_track_schedule() {
        let (p, planner, post) = fixture(safe_post());
        let planned = plan_problem(&p, &planner).unwrap();
        let out = post.apply(&planned.plan, &planned.assigned.graph).unwrap();
        let report = simulate(&planned, &out, &planner, &post, &SimConfig::default()).unwrap();
        let want = out.schedule.mean_arrival();
        assert!((report.metrics.avg_time_to_target_s - want).abs() <= 0.05 + 1e-9);
        // Every waypoint is reached within one tick of its scheduled time.
        for r in 0..3 {
            for (i, wp) in out.schedule.robot(RobotId(r)).iter().enumerate() {
                let reached = report
                    .log
                    .iter()
                    .find(|rec| rec.robot == r && rec.waypoint_index >= i)
                    .unwrap()
                    .t;
                assert!(
                    (reached - wp.time).abs() <= 0.05 + 1e-9,
                    "robot {r} waypoint {i}: {reached} vs {}",
                    wp.time
                );
            }
        }
    }

    #[test]
    fn full_delay_freezes_robots() {
        let (p, planner, post) = fixture(safe_post());
        let planned = plan_problem(&p, &planner).unwrap();
        let out = post.apply(&planned.plan, &planned.assigned.graph).unwrap();
        let config = SimConfig {
            delay: DelayModel::new(1.0, 0.0),
            max_ticks: 100,
            ..SimConfig::default()
        };
        let report = simulate(&planned, &out, &planner, &post, &config).unwrap();
        assert!(report.failure.is_some());
        let start: Vec<_> = report.log[..3].iter().map(|r| (r.x, r.y)).collect();
        for rec in &report.log {
            assert_eq!((rec.x, rec.y), start[rec.robot]);
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let (p, planner, post) = fixture(safe_post());
        let config = SimConfig {
            delay: DelayModel::new(0.3, 0.4),
            seed: 7,
            ..SimConfig::default()
        };
        let a = run(&p, &planner, &post, &config).unwrap();
        let b = run(&p, &planner, &post, &config).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn delays_never_speed_up_completion() {
        let (p, planner, post) = fixture(safe_post());
        for seed in 0..10 {
            let mut last = 0.0;
            for k in 0..=5 {
                let config = SimConfig {
                    delay: DelayModel::new(k as f64 * 0.1, 0.5),
                    seed,
                    ..SimConfig::default()
                };
                let report = run(&p, &planner, &post, &config).unwrap();
                assert!(report.failure.is_none());
                assert_eq!(report.metrics.replans, 0);
                assert!(
                    report.metrics.runtime_s >= last - 1e-9,
                    "seed {seed} p {}",
                    k as f64 * 0.1
                );
                last = report.metrics.runtime_s;
            }
        }
    }

    #[test]
    fn recovery_threshold() {
        assert!(!needs_recovery(0.5, Some(1.0)));
        assert!(needs_recovery(1.5, Some(1.0)));
        assert!(!needs_recovery(100.0, None));
    }

    fn state_for(
        post: &PostConfig<f64>,
        deadline: Option<f64>,
    ) -> (SimState<f64>, PostOutput<f64>) {
        let (p, planner, _) = fixture(post.clone());
        let planned = plan_problem(&p, &planner).unwrap();
        let out = post.apply(&planned.plan, &planned.assigned.graph).unwrap();
        let replanner = Replanner {
            graph: planned.assigned.graph.clone(),
            targets: planned.assigned.targets(),
            kinematics: post.kinematics(3),
            delta: out.delta,
            epsilon: post.epsilon,
            bound: planner.bound,
            highways: None,
            limits: planner.limits(),
        };
        let state = SimState::new(out.stn.clone(), replanner, deadline, 0, 1e-3, 1.0).unwrap();
        (state, out)
    }

    #[test]
    fn late_leader_triggers_resolve_and_shifts_followers() {
        let (mut state, out) = state_for(&PostConfig::default(), None);
        assert_eq!(state.monitor_and_recover().unwrap(), Action::None);
        // Hold robot 2, which leads through F, G and H, for 1.5 s.
        let delays = DelayModel {
            stops: vec![Stop {
                robot: 2,
                from: 0.0,
                until: 1.5,
            }],
            ..DelayModel::none()
        };
        let mut actions = Vec::new();
        while state.clock < 1.5 - 1e-9 {
            state.step(0.05, &delays);
            actions.push(state.monitor_and_recover().unwrap());
        }
        assert!(actions.contains(&Action::StnResolve));
        assert!(!actions.contains(&Action::MapfReplan));
        let first = actions
            .iter()
            .position(|a| *a == Action::StnResolve)
            .unwrap();
        assert!(actions[..first].iter().all(|a| *a == Action::None));
        // Robot 1 follows robot 2 into G; its arrival there moves back.
        state.resolve();
        let before = out.schedule.robot(RobotId(1))[2].time;
        let after = state.schedule.robot(RobotId(1))[2].time;
        assert!(after - before >= 0.5 - 1e-9, "{before} -> {after}");
    }

    #[test]
    fn missed_deadline_replans() {
        let (p, planner, post) = fixture(safe_post());
        let planned = plan_problem(&p, &planner).unwrap();
        let out = post.apply(&planned.plan, &planned.assigned.graph).unwrap();
        let config = SimConfig {
            deadline_factor: Some(1.01),
            delay: DelayModel {
                stops: vec![Stop {
                    robot: 2,
                    from: 0.5,
                    until: 3.0,
                }],
                ..DelayModel::none()
            },
            ..SimConfig::default()
        };
        let report = simulate(&planned, &out, &planner, &post, &config).unwrap();
        assert!(report.metrics.replans >= 1);
        match &report.failure {
            None => assert!(report
                .log
                .iter()
                .rev()
                .take(3)
                .all(|r| r.t == report.metrics.runtime_s)),
            Some(reason) => assert!(!reason.is_empty()),
        }
    }
}
