//! Plan, schedule and simulate the two-team example.

use fleetplan::fixtures::two_team_instance;
use fleetplan::planner::{plan_problem, Algorithm, PlannerConfig};
use fleetplan::post::PostConfig;
use fleetplan::sim::{simulate, SimConfig};
use fleetplan::Problem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::Tapf(two_team_instance());
    let planner = PlannerConfig {
        algorithm: Algorithm::Cbm,
        ..PlannerConfig::default()
    };
    let planned = plan_problem(&problem, &planner)?;
    println!("discrete makespan {}", planned.plan.makespan());

    let post = PostConfig {
        delta: 0.2,
        epsilon: 0.1,
        ..PostConfig::default()
    };
    let out = post.apply(&planned.plan, &planned.assigned.graph)?;
    println!("schedule makespan {:.2} s", out.schedule.makespan());

    let report = simulate(&planned, &out, &planner, &post, &SimConfig::default())?;
    println!("{:?}", report.metrics);
    Ok(())
}
