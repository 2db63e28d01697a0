//! Benchmark suites: scenarios times seeds, one CSV row per run.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{run, Overrides};
use crate::exit;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub scenarios: Vec<SuiteEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    /// Relative to the suite file.
    pub path: PathBuf,
    /// Explicit seeds; otherwise `0..repetitions`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub repetitions: Option<u64>,
}

impl SuiteEntry {
    pub fn seeds(&self) -> Vec<u64> {
        match (&self.seeds, self.repetitions) {
            (Some(s), _) => s.clone(),
            (None, Some(n)) => (0..n).collect(),
            (None, None) => vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scenario: String,
    pub seed: u64,
    pub status: &'static str,
    pub exit_code: i32,
    pub planning_time_s: Option<f64>,
    pub makespan: Option<usize>,
    pub flowtime: Option<usize>,
    pub schedule_makespan_s: Option<f64>,
    pub runtime_s: Option<f64>,
    pub min_pairwise_distance_m: Option<f64>,
    pub avg_time_to_target_s: Option<f64>,
    pub stn_resolves: Option<usize>,
    pub replans: Option<usize>,
    pub safety_violations: Option<usize>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub scenario: String,
    pub metric: &'static str,
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BenchOptions {
    /// 0 uses every core.
    pub threads: usize,
    /// Leave the timing column empty, for byte-identical output.
    pub no_timing: bool,
    pub timeout: Option<f64>,
}

fn status(code: i32) -> &'static str {
    match code {
        exit::OK => "ok",
        exit::INVALID_INPUT => "invalid_input",
        exit::INFEASIBLE => "infeasible",
        exit::TIMEOUT => "timeout",
        exit::EXECUTION_FAILURE => "execution_failure",
        _ => "error",
    }
}

fn failed_row(scenario: String, seed: u64, err: &anyhow::Error) -> Row {
    let code = exit::code_for(err);
    Row {
        scenario,
        seed,
        status: status(code),
        exit_code: code,
        planning_time_s: None,
        makespan: None,
        flowtime: None,
        schedule_makespan_s: None,
        runtime_s: None,
        min_pairwise_distance_m: None,
        avg_time_to_target_s: None,
        stn_resolves: None,
        replans: None,
        safety_violations: None,
        error: format!("{err:#}"),
    }
}

fn run_one(scenario: &Scenario, seed: u64, opts: &BenchOptions) -> Row {
    let mut scenario = scenario.clone();
    let overrides = Overrides {
        seed: Some(seed),
        timeout: opts.timeout,
    };
    let result = overrides
        .apply(&mut scenario)
        .and_then(|_| run(&scenario, None));
    let sim = match result {
        Ok(sim) => sim,
        Err(e) => return failed_row(scenario.name.clone(), seed, &e),
    };
    let code = match sim.check() {
        Ok(()) => exit::OK,
        Err(e) => exit::code_for(&e),
    };
    let m = &sim.report.metrics;
    let summary = sim.plan.summary();
    Row {
        scenario: scenario.name.clone(),
        seed,
        status: status(code),
        exit_code: code,
        planning_time_s: (!opts.no_timing).then_some(summary.planning_time_s),
        makespan: Some(summary.makespan),
        flowtime: Some(summary.flowtime),
        schedule_makespan_s: Some(sim.report.nominal_makespan),
        runtime_s: Some(m.runtime_s),
        min_pairwise_distance_m: m.min_pairwise_distance_m,
        avg_time_to_target_s: Some(m.avg_time_to_target_s),
        stn_resolves: Some(m.stn_resolves),
        replans: Some(m.replans),
        safety_violations: Some(m.safety_violations),
        error: sim.report.failure.clone().unwrap_or_default(),
    }
}

/// Run every scenario of the suite at every seed. Rows follow suite order.
pub fn run_suite(suite_path: &Path, opts: &BenchOptions) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(suite_path)
        .map_err(|e| exit::InvalidInput(format!("cannot read {}: {e}", suite_path.display())))?;
    let suite: Suite = serde_json::from_str(&text)
        .map_err(|e| exit::InvalidInput(format!("{}: {e}", suite_path.display())))?;
    let dir = suite_path.parent().unwrap_or(Path::new("."));
    let loaded: Vec<(String, Result<Scenario>)> = suite
        .scenarios
        .iter()
        .map(|entry| {
            let path = dir.join(&entry.path);
            (path.display().to_string(), Scenario::load(&path))
        })
        .collect();
    let jobs: Vec<(usize, u64)> = suite
        .scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.seeds().into_iter().map(move |s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(i, seed)| match &loaded[i] {
                (_, Ok(scenario)) => run_one(scenario, seed, opts),
                (path, Err(e)) => failed_row(path.clone(), seed, e),
            })
            .collect()
    }))
}

/// Mean, min and max of each numeric column over successful runs.
pub fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    type Column = (&'static str, fn(&Row) -> Option<f64>);
    let columns: [Column; 7] = [
        ("planning_time_s", |r| r.planning_time_s),
        ("makespan", |r| r.makespan.map(|v| v as f64)),
        ("schedule_makespan_s", |r| r.schedule_makespan_s),
        ("runtime_s", |r| r.runtime_s),
        ("min_pairwise_distance_m", |r| r.min_pairwise_distance_m),
        ("stn_resolves", |r| r.stn_resolves.map(|v| v as f64)),
        ("replans", |r| r.replans.map(|v| v as f64)),
    ];
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.scenario.as_str()) {
            names.push(&r.scenario);
        }
    }
    let mut out = Vec::new();
    for name in names {
        for (metric, get) in columns {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.scenario == name && r.exit_code == exit::OK)
                .filter_map(get)
                .collect();
            if values.is_empty() {
                continue;
            }
            out.push(Aggregate {
                scenario: name.to_string(),
                metric,
                runs: values.len(),
                mean: values.iter().sum::<f64>() / values.len() as f64,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    out
}

pub fn write_csv<T: Serialize>(records: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_default() {
        let e: SuiteEntry =
            serde_json::from_str(r#"{"path": "a.json", "repetitions": 3}"#).unwrap();
        assert_eq!(e.seeds(), vec![0, 1, 2]);
        let e: SuiteEntry = serde_json::from_str(r#"{"path": "a.json", "seeds": [7, 9]}"#).unwrap();
        assert_eq!(e.seeds(), vec![7, 9]);
        let e: SuiteEntry = serde_json::from_str(r#"{"path": "a.json"}"#).unwrap();
        assert_eq!(e.seeds(), vec![0]);
    }

    #[test]
    fn aggregates_skip_failures() {
        let err = anyhow::anyhow!("boom");
        let mut ok = failed_row("s".into(), 0, &err);
        ok.exit_code = 0;
        ok.runtime_s = Some(2.0);
        let mut ok2 = ok.clone();
        ok2.runtime_s = Some(4.0);
        let bad = failed_row("s".into(), 2, &err);
        let agg = aggregate(&[ok, ok2, bad]);
        assert_eq!(agg.len(), 1);
        assert_eq!(
            (agg[0].runs, agg[0].mean, agg[0].min, agg[0].max),
            (2, 3.0, 2.0, 4.0)
        );
    }
}
