//! One entry point over the discrete planners.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::mapf::{
    plan_cbs_with, plan_ecbs_with, suggest_highways, HighwaySet, Objective, PlanError,
    SearchLimits, SuboptimalityBound,
};
use crate::scalar::Scalar;
use crate::tapf::plan_cbm_with;
use crate::world::{DiscretePlan, MapfInstance, Problem, RobotSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Cbs,
    #[default]
    Ecbs,
    Cbm,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum HighwayChoice {
    #[default]
    None,
    /// Derived from independent shortest paths.
    Auto,
    Explicit(HighwaySet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub algorithm: Algorithm,
    pub objective: Objective,
    pub bound: SuboptimalityBound,
    pub highways: HighwayChoice,
    pub timeout: Option<Duration>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ecbs,
            objective: Objective::Makespan,
            bound: SuboptimalityBound::new(1.5).expect("valid bound"),
            highways: HighwayChoice::None,
            timeout: None,
        }
    }
}

impl PlannerConfig {
    pub fn limits(&self) -> SearchLimits {
        SearchLimits {
            timeout: self.timeout,
            max_nodes: None,
        }
    }

    pub fn highway_set<S: Scalar>(
        &self,
        instance: &MapfInstance<S>,
    ) -> Result<Option<HighwaySet>, PlanError> {
        match &self.highways {
            HighwayChoice::None => Ok(None),
            HighwayChoice::Auto => suggest_highways(instance).map(Some),
            HighwayChoice::Explicit(h) => Ok(Some(h.clone())),
        }
    }
}

/// A plan together with the robot-to-target instance it solves.
#[derive(Debug, Clone)]
pub struct Planned<S: Scalar> {
    pub plan: DiscretePlan,
    /// Targets as assigned by the planner.
    pub assigned: MapfInstance<S>,
    pub highways: Option<HighwaySet>,
}

/// Run the configured planner.
///
/// Conflict-based search variants need fixed targets, so a team instance is
/// accepted only if every team is a singleton. Matching works on both kinds.
pub fn plan_problem<S: Scalar>(
    problem: &Problem<S>,
    config: &PlannerConfig,
) -> Result<Planned<S>, PlanError> {
    let limits = config.limits();
    match config.algorithm {
        Algorithm::Cbm => {
            let tapf = match problem {
                Problem::Tapf(t) => t.clone(),
                Problem::Mapf(m) => m.to_tapf(),
            };
            let plan = plan_cbm_with(&tapf, &limits)?;
            let robots = plan
                .paths()
                .iter()
                .map(|p| RobotSpec {
                    start: p[0],
                    target: *p.last().expect("paths are non-empty"),
                })
                .collect();
            Ok(Planned {
                plan,
                assigned: MapfInstance::new(tapf.graph, robots),
                highways: None,
            })
        }
        Algorithm::Cbs | Algorithm::Ecbs => {
            let mapf = match problem {
                Problem::Mapf(m) => m.clone(),
                Problem::Tapf(t) => t.as_mapf().ok_or_else(|| {
                    PlanError::InvalidInput(
                        "conflict-based search needs one target per robot; use cbm".into(),
                    )
                })?,
            };
            let highways = config.highway_set(&mapf)?;
            let plan = match config.algorithm {
                Algorithm::Cbs => plan_cbs_with(&mapf, config.objective, &limits)?,
                _ => plan_ecbs_with(
                    &mapf,
                    config.objective,
                    config.bound,
                    highways.as_ref(),
                    &limits,
                )?,
            };
            Ok(Planned {
                plan,
                assigned: mapf,
                highways,
            })
        }
    }
}
