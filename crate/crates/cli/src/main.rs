use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fleetplan_cli::bench::{aggregate, run_suite, write_csv, BenchOptions};
use fleetplan_cli::commands::{self, Overrides, PlanRun};
use fleetplan_cli::exit;
use fleetplan_cli::render::svg;
use fleetplan_cli::Scenario;

#[derive(Parser)]
#[command(
    name = "fleetplan",
    version,
    about = "Plan, schedule and simulate robot fleets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Planning timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario's instance and write the discrete plan.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a plan into a timed schedule.
    Post {
        #[command(flatten)]
        common: Common,
        /// Plan file; planned from the scenario if omitted.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the temporal network as `from to lo hi` lines.
        #[arg(long)]
        stn_dump: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the full pipeline and execute the schedule.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Plan or schedule file to execute instead of planning.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Metrics JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory log, one JSON record per robot per tick.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a suite of scenarios over several seeds.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        /// Per-run CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Aggregate CSV; printed to stderr if omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        timeout: Option<f64>,
        /// Leave planning times out of the CSV.
        #[arg(long)]
        no_timing: bool,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load(common: &Common) -> Result<Scenario> {
    let mut scenario = Scenario::load(&common.scenario)?;
    Overrides {
        seed: common.seed,
        timeout: common.timeout,
    }
    .apply(&mut scenario)?;
    Ok(scenario)
}

fn plan_from(scenario: &Scenario, file: Option<&Path>) -> Result<PlanRun> {
    match file {
        None => commands::plan(scenario),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| exit::InvalidInput(format!("cannot read {}: {e}", p.display())))?;
            let doc = commands::parse_plan_file(&text)?;
            Ok(PlanRun {
                planned: commands::load_plan(scenario, &doc)?,
                planning_time: Default::default(),
            })
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan { common, out } => {
            let scenario = load(&common)?;
            let run = commands::plan(&scenario)?;
            let summary = json(&run.summary())?;
            write_out(out.as_deref(), &json(&run.doc(&scenario.problem))?)?;
            if out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
        }
        Command::Post {
            common,
            plan,
            out,
            stn_dump,
            svg: svg_path,
        } => {
            let scenario = load(&common)?;
            let run = plan_from(&scenario, plan.as_deref())?;
            let post = commands::post(&scenario, &run.planned)?;
            let doc = commands::post_doc(&scenario, &run.planned, &post)?;
            write_out(out.as_deref(), &json(&doc)?)?;
            if out.is_some() {
                print!("{}", json(&doc.stn)?);
            }
            if let Some(p) = stn_dump {
                std::fs::write(&p, post.stn.dump())
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = svg_path {
                let paths: Vec<Vec<(f64, f64, f64)>> = post
                    .schedule
                    .robots()
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|w| (w.time, w.position.x, w.position.y))
                            .collect()
                    })
                    .collect();
                let text = svg(&run.planned.assigned.graph, &paths, Some(&post.schedule));
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Simulate {
            common,
            plan,
            out,
            log,
            svg: svg_path,
        } => {
            let scenario = load(&common)?;
            let run = plan_from(&scenario, plan.as_deref())?;
            let sim = commands::run(&scenario, Some(run))?;
            write_out(out.as_deref(), &json(&sim.doc(&scenario))?)?;
            if let Some(p) = log {
                std::fs::write(&p, commands::log_lines(&sim.report.log)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = svg_path {
                let paths = commands::trajectories(&sim.report.log);
                let text = svg(
                    &sim.plan.planned.assigned.graph,
                    &paths,
                    Some(&sim.post.schedule),
                );
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
            sim.check()?;
        }
        Command::Bench {
            suite,
            out,
            summary,
            threads,
            timeout,
            no_timing,
        } => {
            let opts = BenchOptions {
                threads,
                no_timing,
                timeout,
            };
            let rows = run_suite(&suite, &opts)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            write_out(out.as_deref(), std::str::from_utf8(&buf)?)?;
            let mut agg = Vec::new();
            write_csv(&aggregate(&rows), &mut agg)?;
            match summary {
                Some(p) => {
                    std::fs::write(&p, agg).with_context(|| format!("writing {}", p.display()))?
                }
                None => std::io::stderr().write_all(&agg)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_for(&e) as u8)
        }
    }
}
