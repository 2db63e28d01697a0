//! Scenario files: an instance plus planner, post-processing and simulation
//! settings.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fleetplan::mapf::{HighwaySet, Objective, SuboptimalityBound};
use fleetplan::planner::{Algorithm, HighwayChoice, PlannerConfig};
use fleetplan::post::PostConfig;
use fleetplan::sim::SimConfig;
use fleetplan::world::format::{GraphDoc, InstanceDoc, RobotDoc, TeamDoc, VertexRef};
use fleetplan::Problem;

use crate::exit::InvalidInput;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    pub instance: InstanceSource,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub post: PostConfig<f64>,
    #[serde(default)]
    pub sim: SimConfig<f64>,
}

/// An instance document inline, or the path of one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    Path(PathBuf),
    Inline(InlineInstance),
}

/// Like an instance document, but the grid may also come from a map file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// Grid map file, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robots: Option<Vec<RobotDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teams: Option<Vec<TeamDoc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighwayMode {
    Auto,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HighwaySpec {
    Mode(HighwayMode),
    /// Directed `[from, to]` pairs.
    List(Vec<[VertexRef; 2]>),
}

impl Default for HighwaySpec {
    fn default() -> Self {
        HighwaySpec::Mode(HighwayMode::None)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub algorithm: Algorithm,
    pub objective: Objective,
    /// Suboptimality factor for ecbs.
    pub w: f64,
    pub highways: HighwaySpec,
    /// Seconds.
    pub timeout: Option<f64>,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ecbs,
            objective: Objective::Makespan,
            w: 1.5,
            highways: HighwaySpec::default(),
            timeout: None,
        }
    }
}

/// A scenario with its instance resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub problem: Problem,
    pub planner: PlannerConfig,
    pub post: PostConfig<f64>,
    pub sim: SimConfig<f64>,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InvalidInput(msg.into()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

impl InlineInstance {
    fn to_doc(&self, dir: &Path) -> Result<InstanceDoc> {
        let grid = match (&self.grid, &self.map) {
            (Some(_), Some(_)) => bail!(invalid("give either `grid` or `map`, not both")),
            (Some(text), None) => Some(text.clone()),
            (None, Some(map)) => Some(read(&dir.join(map))?),
            (None, None) => None,
        };
        Ok(InstanceDoc {
            graph: self.graph.clone(),
            grid,
            robots: self.robots.clone(),
            teams: self.teams.clone(),
        })
    }
}

impl PlannerSection {
    pub fn to_config(&self, problem: &Problem) -> Result<PlannerConfig> {
        let bound = SuboptimalityBound::new(self.w)?;
        let timeout = match self.timeout {
            None => None,
            Some(t) if t.is_finite() && t > 0.0 => Some(Duration::from_secs_f64(t)),
            Some(t) => bail!(invalid(format!("timeout {t} must be positive"))),
        };
        let highways = match &self.highways {
            HighwaySpec::Mode(HighwayMode::None) => HighwayChoice::None,
            HighwaySpec::Mode(HighwayMode::Auto) => HighwayChoice::Auto,
            HighwaySpec::List(pairs) => {
                let graph = problem.graph();
                let pairs = pairs
                    .iter()
                    .map(|[a, b]| Ok((a.resolve(graph)?, b.resolve(graph)?)))
                    .collect::<Result<Vec<_>, fleetplan::world::WorldError>>()?;
                HighwayChoice::Explicit(HighwaySet::new(graph, pairs)?)
            }
        };
        Ok(PlannerConfig {
            algorithm: self.algorithm,
            objective: self.objective,
            bound,
            highways,
            timeout,
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let file: ScenarioFile =
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let fallback = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_file(file, dir, fallback)
    }

    /// Resolve `file`, reading referenced files relative to `dir`.
    pub fn from_file(file: ScenarioFile, dir: &Path, fallback_name: String) -> Result<Self> {
        let doc = match &file.instance {
            InstanceSource::Path(p) => {
                let p = dir.join(p);
                let text = read(&p)?;
                let inline: InlineInstance = serde_json::from_str(&text)
                    .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                inline.to_doc(p.parent().unwrap_or(dir))?
            }
            InstanceSource::Inline(inline) => inline.to_doc(dir)?,
        };
        let problem: Problem = doc.to_problem().context("building the instance")?;
        let planner = file.planner.to_config(&problem)?;
        file.sim.validate()?;
        Ok(Self {
            name: file.name.unwrap_or(fallback_name),
            problem,
            planner,
            post: file.post,
            sim: file.sim,
        })
    }
}
