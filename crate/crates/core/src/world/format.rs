//! JSON documents for instances and discrete plans.

use serde::{Deserialize, Serialize};

use super::{
    DiscretePlan, Edge, Graph, GridMap, MapfInstance, Problem, RobotSpec, TapfInstance, Team,
    VertexId, WorldError,
};
use crate::scalar::{Point, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub u: String,
    pub v: String,
    /// Defaults to the Euclidean distance between the endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

/// A vertex by name, or a grid cell as `[x, y]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Name(String),
    Cell([usize; 2]),
}

impl VertexRef {
    pub fn resolve<S: Scalar>(&self, graph: &Graph<S>) -> Result<VertexId, WorldError> {
        let name = match self {
            VertexRef::Name(n) => n.clone(),
            VertexRef::Cell([x, y]) => GridMap::cell_name(*x, *y),
        };
        graph
            .lookup(&name)
            .ok_or_else(|| WorldError::Instance(format!("unknown vertex `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotDoc {
    pub start: VertexRef,
    pub target: VertexRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamDoc {
    pub starts: Vec<VertexRef>,
    pub targets: Vec<VertexRef>,
}

/// Instance document: exactly one of `graph`/`grid`, and exactly one of
/// `robots`/`teams`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robots: Option<Vec<RobotDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teams: Option<Vec<TeamDoc>>,
}

impl GraphDoc {
    pub fn to_graph<S: Scalar>(&self) -> Result<Graph<S>, WorldError> {
        let names: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let positions: Vec<Point<S>> = self
            .vertices
            .iter()
            .map(|v| Point::new(S::of(v.x), S::of(v.y)))
            .collect();
        let index: std::collections::HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let find = |n: &str| {
                index.get(n).map(|&i| VertexId(i)).ok_or_else(|| {
                    WorldError::Graph(format!("edge references unknown vertex `{n}`"))
                })
            };
            let (u, v) = (find(&e.u)?, find(&e.v)?);
            let length = match e.length {
                Some(l) => S::of(l),
                None => positions[u.0].distance(&positions[v.0]),
            };
            edges.push(Edge {
                u,
                v,
                length,
                speed_limit: e.speed_limit.map(S::of),
            });
        }
        Graph::new(names, positions, edges)
    }

    pub fn from_graph<S: Scalar>(graph: &Graph<S>) -> Self {
        Self {
            vertices: graph
                .vertices()
                .map(|v| {
                    let p = graph.position(v);
                    VertexDoc {
                        id: graph.name(v).to_string(),
                        x: p.x.as_f64(),
                        y: p.y.as_f64(),
                    }
                })
                .collect(),
            edges: graph
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    u: graph.name(e.u).to_string(),
                    v: graph.name(e.v).to_string(),
                    length: Some(e.length.as_f64()),
                    speed_limit: e.speed_limit.map(Scalar::as_f64),
                })
                .collect(),
        }
    }
}

impl InstanceDoc {
    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn graph<S: Scalar>(&self) -> Result<Graph<S>, WorldError> {
        match (&self.graph, &self.grid) {
            (Some(g), None) => g.to_graph(),
            (None, Some(text)) => GridMap::parse(text)?.to_graph(),
            _ => Err(WorldError::Instance(
                "exactly one of `graph` or `grid` is required".into(),
            )),
        }
    }

    pub fn to_problem<S: Scalar>(&self) -> Result<Problem<S>, WorldError> {
        let graph = self.graph::<S>()?;
        match (&self.robots, &self.teams) {
            (Some(robots), None) => {
                let robots = robots
                    .iter()
                    .map(|r| {
                        Ok(RobotSpec {
                            start: r.start.resolve(&graph)?,
                            target: r.target.resolve(&graph)?,
                        })
                    })
                    .collect::<Result<Vec<_>, WorldError>>()?;
                Ok(Problem::Mapf(MapfInstance::new(graph, robots)))
            }
            (None, Some(teams)) => {
                let teams = teams
                    .iter()
                    .map(|t| {
                        Ok(Team {
                            starts: t
                                .starts
                                .iter()
                                .map(|v| v.resolve(&graph))
                                .collect::<Result<_, _>>()?,
                            targets: t
                                .targets
                                .iter()
                                .map(|v| v.resolve(&graph))
                                .collect::<Result<_, _>>()?,
                        })
                    })
                    .collect::<Result<Vec<_>, WorldError>>()?;
                Ok(Problem::Tapf(TapfInstance::new(graph, teams)))
            }
            _ => Err(WorldError::Instance(
                "exactly one of `robots` or `teams` is required".into(),
            )),
        }
    }

    pub fn from_problem<S: Scalar>(problem: &Problem<S>) -> Self {
        let graph = problem.graph();
        let name = |v: VertexId| VertexRef::Name(graph.name(v).to_string());
        let mut doc = InstanceDoc {
            graph: Some(GraphDoc::from_graph(graph)),
            ..Default::default()
        };
        match problem {
            Problem::Mapf(m) => {
                doc.robots = Some(
                    m.robots
                        .iter()
                        .map(|r| RobotDoc {
                            start: name(r.start),
                            target: name(r.target),
                        })
                        .collect(),
                )
            }
            Problem::Tapf(t) => {
                doc.teams = Some(
                    t.teams
                        .iter()
                        .map(|team| TeamDoc {
                            starts: team.starts.iter().map(|&v| name(v)).collect(),
                            targets: team.targets.iter().map(|&v| name(v)).collect(),
                        })
                        .collect(),
                )
            }
        }
        doc
    }
}

/// Plan file: vertex names per robot per timestep, padded to the makespan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub makespan: usize,
    pub flowtime: usize,
    /// Team of each robot, for plans of team instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teams: Option<Vec<usize>>,
    pub paths: Vec<Vec<String>>,
}

impl PlanDoc {
    pub fn from_plan<S: Scalar>(
        plan: &DiscretePlan,
        graph: &Graph<S>,
        teams: Option<Vec<usize>>,
    ) -> Self {
        Self {
            makespan: plan.makespan(),
            flowtime: plan.flowtime(),
            teams,
            paths: plan
                .padded()
                .into_iter()
                .map(|p| p.into_iter().map(|v| graph.name(v).to_string()).collect())
                .collect(),
        }
    }

    pub fn to_plan<S: Scalar>(&self, graph: &Graph<S>) -> Result<DiscretePlan, WorldError> {
        let paths = self
            .paths
            .iter()
            .map(|p| {
                p.iter()
                    .map(|n| {
                        graph.lookup(n).ok_or_else(|| {
                            WorldError::Plan(format!("plan references unknown vertex `{n}`"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DiscretePlan::new(paths))
    }
}
