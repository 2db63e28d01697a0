use std::collections::HashMap;
use std::fmt;

use super::{Graph, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotSpec {
    pub start: VertexId,
    pub target: VertexId,
}

/// Fixed start/target pairs.
#[derive(Debug, Clone)]
pub struct MapfInstance<S> {
    pub graph: Graph<S>,
    pub robots: Vec<RobotSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Team {
    pub starts: Vec<VertexId>,
    pub targets: Vec<VertexId>,
}

impl Team {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }
}

/// Teams of exchangeable robots, each with its own target set.
#[derive(Debug, Clone)]
pub struct TapfInstance<S> {
    pub graph: Graph<S>,
    pub teams: Vec<Team>,
}

/// Either kind of problem, as loaded from an instance document.
#[derive(Debug, Clone)]
pub enum Problem<S> {
    Mapf(MapfInstance<S>),
    Tapf(TapfInstance<S>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingVertex {
        what: String,
        vertex: VertexId,
    },
    DuplicateStart {
        vertex: VertexId,
    },
    DuplicateTarget {
        vertex: VertexId,
    },
    TeamSizeMismatch {
        team: usize,
        starts: usize,
        targets: usize,
    },
    EmptyTeam {
        team: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingVertex { what, vertex } => {
                write!(f, "{what} refers to missing vertex {vertex}")
            }
            Violation::DuplicateStart { vertex } => write!(f, "duplicate start {vertex}"),
            Violation::DuplicateTarget { vertex } => write!(f, "duplicate target {vertex}"),
            Violation::TeamSizeMismatch {
                team,
                starts,
                targets,
            } => {
                write!(f, "team {team} has {starts} starts but {targets} targets")
            }
            Violation::EmptyTeam { team } => write!(f, "team {team} is empty"),
        }
    }
}

fn check_vertices<S: Scalar>(
    graph: &Graph<S>,
    labelled: impl Iterator<Item = (String, VertexId)>,
    out: &mut Vec<Violation>,
) {
    for (what, v) in labelled {
        if !graph.contains(v) {
            out.push(Violation::MissingVertex { what, vertex: v });
        }
    }
}

fn check_distinct(
    vertices: impl Iterator<Item = VertexId>,
    make: impl Fn(VertexId) -> Violation,
    out: &mut Vec<Violation>,
) {
    let mut seen: HashMap<VertexId, usize> = HashMap::new();
    let mut order = Vec::new();
    for v in vertices {
        let count = seen.entry(v).or_insert(0);
        *count += 1;
        if *count == 2 {
            order.push(v);
        }
    }
    out.extend(order.into_iter().map(make));
}

impl<S: Scalar> MapfInstance<S> {
    pub fn new(graph: Graph<S>, robots: Vec<RobotSpec>) -> Self {
        Self { graph, robots }
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn starts(&self) -> Vec<VertexId> {
        self.robots.iter().map(|r| r.start).collect()
    }

    pub fn targets(&self) -> Vec<VertexId> {
        self.robots.iter().map(|r| r.target).collect()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_vertices(
            &self.graph,
            self.robots.iter().enumerate().flat_map(|(i, r)| {
                [
                    (format!("start of robot {i}"), r.start),
                    (format!("target of robot {i}"), r.target),
                ]
            }),
            &mut out,
        );
        check_distinct(
            self.robots.iter().map(|r| r.start),
            |vertex| Violation::DuplicateStart { vertex },
            &mut out,
        );
        check_distinct(
            self.robots.iter().map(|r| r.target),
            |vertex| Violation::DuplicateTarget { vertex },
            &mut out,
        );
        out
    }
}

impl<S: Scalar> TapfInstance<S> {
    pub fn new(graph: Graph<S>, teams: Vec<Team>) -> Self {
        Self { graph, teams }
    }

    pub fn num_robots(&self) -> usize {
        self.teams.iter().map(Team::len).sum()
    }

    /// Team index of each robot, robots numbered team by team in start order.
    pub fn robot_teams(&self) -> Vec<usize> {
        self.teams
            .iter()
            .enumerate()
            .flat_map(|(i, t)| std::iter::repeat_n(i, t.len()))
            .collect()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, team) in self.teams.iter().enumerate() {
            if team.starts.is_empty() && team.targets.is_empty() {
                out.push(Violation::EmptyTeam { team: i });
            }
            if team.starts.len() != team.targets.len() {
                out.push(Violation::TeamSizeMismatch {
                    team: i,
                    starts: team.starts.len(),
                    targets: team.targets.len(),
                });
            }
            check_vertices(
                &self.graph,
                team.starts
                    .iter()
                    .map(|&v| (format!("start of team {i}"), v))
                    .chain(
                        team.targets
                            .iter()
                            .map(|&v| (format!("target of team {i}"), v)),
                    ),
                &mut out,
            );
        }
        check_distinct(
            self.teams.iter().flat_map(|t| t.starts.iter().copied()),
            |vertex| Violation::DuplicateStart { vertex },
            &mut out,
        );
        check_distinct(
            self.teams.iter().flat_map(|t| t.targets.iter().copied()),
            |vertex| Violation::DuplicateTarget { vertex },
            &mut out,
        );
        out
    }

    /// Every team a singleton: the instance is a plain MAPF instance.
    pub fn as_mapf(&self) -> Option<MapfInstance<S>> {
        if self
            .teams
            .iter()
            .all(|t| t.len() == 1 && t.targets.len() == 1)
        {
            Some(MapfInstance::new(
                self.graph.clone(),
                self.teams
                    .iter()
                    .map(|t| RobotSpec {
                        start: t.starts[0],
                        target: t.targets[0],
                    })
                    .collect(),
            ))
        } else {
            None
        }
    }
}

impl<S: Scalar> MapfInstance<S> {
    /// Each robot as its own singleton team.
    pub fn to_tapf(&self) -> TapfInstance<S> {
        TapfInstance::new(
            self.graph.clone(),
            self.robots
                .iter()
                .map(|r| Team {
                    starts: vec![r.start],
                    targets: vec![r.target],
                })
                .collect(),
        )
    }
}

impl<S: Scalar> Problem<S> {
    pub fn graph(&self) -> &Graph<S> {
        match self {
            Problem::Mapf(m) => &m.graph,
            Problem::Tapf(t) => &t.graph,
        }
    }

    pub fn num_robots(&self) -> usize {
        match self {
            Problem::Mapf(m) => m.num_robots(),
            Problem::Tapf(t) => t.num_robots(),
        }
    }
}

/// Every invariant violation of the instance; empty means valid.
pub fn validate_instance<S: Scalar>(problem: &Problem<S>) -> Result<(), Vec<Violation>> {
    let v = match problem {
        Problem::Mapf(m) => m.violations(),
        Problem::Tapf(t) => t.violations(),
    };
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}
