//! The plan, post and simulate stages, shared by the subcommands and bench.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use fleetplan::planner::{plan_problem, Planned};
use fleetplan::post::{stn_slack, PostOutput, WaypointDoc};
use fleetplan::sim::{simulate, Metrics, SimReport, TrajectoryRecord};
use fleetplan::world::format::PlanDoc;
use fleetplan::world::{detect_conflicts, RobotSpec, VertexId};
use fleetplan::{MapfInstance, Problem};

use crate::exit::{ExecutionFailure, InvalidInput};
use crate::scenario::Scenario;

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub timeout: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) -> Result<()> {
        if let Some(seed) = self.seed {
            scenario.sim.seed = seed;
        }
        if let Some(t) = self.timeout {
            if !(t.is_finite() && t > 0.0) {
                bail!(InvalidInput(format!("timeout {t} must be positive")));
            }
            scenario.planner.timeout = Some(Duration::from_secs_f64(t));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlanRun {
    pub planned: Planned<f64>,
    pub planning_time: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub robots: usize,
    pub makespan: usize,
    pub flowtime: usize,
    pub planning_time_s: f64,
    /// Fraction of moves along a highway, when highways were used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub highway_usage: Option<f64>,
}

impl PlanRun {
    pub fn summary(&self) -> PlanSummary {
        let plan = &self.planned.plan;
        PlanSummary {
            robots: plan.num_robots(),
            makespan: plan.makespan(),
            flowtime: plan.flowtime(),
            planning_time_s: self.planning_time.as_secs_f64(),
            highway_usage: self
                .planned
                .highways
                .as_ref()
                .map(|h| h.usage(plan.paths())),
        }
    }

    pub fn doc(&self, problem: &Problem) -> PlanDoc {
        PlanDoc::from_plan(&self.planned.plan, problem.graph(), robot_teams(problem))
    }
}

fn robot_teams(problem: &Problem) -> Option<Vec<usize>> {
    match problem {
        Problem::Tapf(t) => Some(t.robot_teams()),
        Problem::Mapf(_) => None,
    }
}

fn starts(problem: &Problem) -> Vec<VertexId> {
    match problem {
        Problem::Mapf(m) => m.starts(),
        Problem::Tapf(t) => t
            .teams
            .iter()
            .flat_map(|team| team.starts.iter().copied())
            .collect(),
    }
}

pub fn plan(scenario: &Scenario) -> Result<PlanRun> {
    let clock = Instant::now();
    let planned = plan_problem(&scenario.problem, &scenario.planner).context("planning")?;
    Ok(PlanRun {
        planned,
        planning_time: clock.elapsed(),
    })
}

/// Check a plan file against the scenario and attach its assignment.
pub fn load_plan(scenario: &Scenario, doc: &PlanDoc) -> Result<Planned<f64>> {
    let problem = &scenario.problem;
    let graph = problem.graph();
    let plan = doc.to_plan(graph)?;
    plan.check_moves(graph)?;
    let bad = |msg: String| {
        anyhow::Error::new(InvalidInput(format!(
            "plan does not fit the scenario: {msg}"
        )))
    };
    if plan.num_robots() != problem.num_robots() {
        bail!(bad(format!(
            "{} robots, scenario has {}",
            plan.num_robots(),
            problem.num_robots()
        )));
    }
    let ends: Vec<VertexId> = plan
        .paths()
        .iter()
        .map(|p| *p.last().expect("non-empty path"))
        .collect();
    match problem {
        Problem::Mapf(m) => plan.check_endpoints(&m.starts(), &m.targets())?,
        Problem::Tapf(t) => {
            if plan.paths().iter().map(|p| p[0]).ne(starts(problem)) {
                bail!(bad("starts differ".into()));
            }
            let mut offset = 0;
            for (i, team) in t.teams.iter().enumerate() {
                let mut got = ends[offset..offset + team.len()].to_vec();
                let mut want = team.targets.clone();
                got.sort();
                want.sort();
                if got != want {
                    bail!(bad(format!("team {i} does not end on its targets")));
                }
                offset += team.len();
            }
        }
    }
    let conflicts = detect_conflicts(&plan, graph)?;
    if !conflicts.is_empty() {
        bail!(bad(format!(
            "{} conflicts, first: {:?}",
            conflicts.len(),
            conflicts[0]
        )));
    }
    let robots = plan
        .paths()
        .iter()
        .map(|p| RobotSpec {
            start: p[0],
            target: *p.last().expect("non-empty path"),
        })
        .collect();
    let assigned = MapfInstance::new(graph.clone(), robots);
    let highways = scenario.planner.highway_set(&assigned).ok().flatten();
    Ok(Planned {
        plan,
        assigned,
        highways,
    })
}

/// A plan file, or the output of `post`, which embeds its plan.
pub fn parse_plan_file(text: &str) -> Result<PlanDoc> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("plan") {
        Some(p) => p.clone(),
        None => value,
    };
    Ok(serde_json::from_value(inner)?)
}

pub fn post(scenario: &Scenario, planned: &Planned<f64>) -> Result<PostOutput<f64>> {
    scenario
        .post
        .apply(&planned.plan, &planned.assigned.graph)
        .context("post-processing")
}

#[derive(Debug, Clone, Serialize)]
pub struct StnStats {
    pub events: usize,
    pub constraints: usize,
    pub makespan: f64,
    /// Smallest finite slack; `None` if every event may slip without bound.
    pub min_slack: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PostDoc {
    pub delta: f64,
    pub makespan: f64,
    pub stn: StnStats,
    pub schedule: Vec<Vec<WaypointDoc<f64>>>,
    pub plan: PlanDoc,
}

pub fn post_doc(
    scenario: &Scenario,
    planned: &Planned<f64>,
    out: &PostOutput<f64>,
) -> Result<PostDoc> {
    let slack = stn_slack(&out.stn, &out.schedule)?;
    let min_slack = slack.into_iter().flatten().reduce(f64::min);
    let makespan = out.schedule.makespan();
    Ok(PostDoc {
        delta: out.delta,
        makespan,
        stn: StnStats {
            events: out.stn.events().len(),
            constraints: out.stn.constraints().len(),
            makespan,
            min_slack,
        },
        schedule: out.schedule.to_doc(),
        plan: PlanDoc::from_plan(
            &planned.plan,
            &planned.assigned.graph,
            robot_teams(&scenario.problem),
        ),
    })
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub plan: PlanRun,
    pub post: PostOutput<f64>,
    pub report: SimReport<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimDoc {
    pub scenario: String,
    pub seed: u64,
    pub nominal_makespan: f64,
    pub metrics: Metrics<f64>,
    pub deadline_dropped: bool,
    pub failure: Option<String>,
}

impl SimRun {
    pub fn doc(&self, scenario: &Scenario) -> SimDoc {
        SimDoc {
            scenario: scenario.name.clone(),
            seed: scenario.sim.seed,
            nominal_makespan: self.report.nominal_makespan,
            metrics: self.report.metrics.clone(),
            deadline_dropped: self.report.deadline_dropped,
            failure: self.report.failure.clone(),
        }
    }

    /// Error if execution did not finish.
    pub fn check(&self) -> Result<()> {
        match &self.report.failure {
            Some(f) => bail!(ExecutionFailure(f.clone())),
            None => Ok(()),
        }
    }
}

/// Full pipeline; with `plan` given, planning is skipped.
pub fn run(scenario: &Scenario, plan: Option<PlanRun>) -> Result<SimRun> {
    let plan = match plan {
        Some(p) => p,
        None => self::plan(scenario)?,
    };
    let out = post(scenario, &plan.planned)?;
    let report = simulate(
        &plan.planned,
        &out,
        &scenario.planner,
        &scenario.post,
        &scenario.sim,
    )
    .context("simulating")?;
    Ok(SimRun {
        plan,
        post: out,
        report,
    })
}

/// Trajectory log as JSON lines.
pub fn log_lines(log: &[TrajectoryRecord<f64>]) -> Result<String> {
    let mut out = String::new();
    for rec in log {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

/// Positions per robot, in time order.
pub fn trajectories(log: &[TrajectoryRecord<f64>]) -> Vec<Vec<(f64, f64, f64)>> {
    let mut by_robot: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for rec in log {
        by_robot
            .entry(rec.robot)
            .or_default()
            .push((rec.t, rec.x, rec.y));
    }
    by_robot.into_values().collect()
}
