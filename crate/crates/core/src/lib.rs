//! Multi-robot planning toolkit.
//!
//! Discrete planners ([`mapf`], [`tapf`]) produce unit-timestep plans;
//! [`post`] turns them into continuous, kinematically feasible schedules
//! through a temporal plan graph and a simple temporal network; [`sim`]
//! executes schedules under delays with slack absorption, re-scheduling and
//! re-planning.
//!
//! Everything continuous is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix it to `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fixtures;
pub mod mapf;
pub mod planner;
pub mod post;
pub mod scalar;
pub mod sim;
pub mod tapf;
pub mod world;

pub use scalar::{Point, Scalar};
pub use world::{DiscretePlan, RobotId, VertexId};

pub type Graph = world::Graph<f64>;
pub type MapfInstance = world::MapfInstance<f64>;
pub type TapfInstance = world::TapfInstance<f64>;
pub type Problem = world::Problem<f64>;
pub type Kinematics = post::Kinematics<f64>;
pub type AugmentedTpg = post::AugmentedTpg<f64>;
pub type Stn = post::Stn<f64>;
pub type Schedule = post::Schedule<f64>;
pub type SimState = sim::SimState<f64>;
pub type Metrics = sim::Metrics<f64>;
