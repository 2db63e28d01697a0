//! Target assignment and path finding for teams of exchangeable robots.

mod assign;
mod cbm;
mod flow;
mod network;

pub use assign::{bottleneck_distance, tapf_to_mapf};
pub use cbm::{makespan_lower_bound, plan_cbm, plan_cbm_with};
pub use flow::MinCostFlow;
pub use network::{
    plan_team_flow, TeamConstraint, TeamConstraintKind, TeamConstraintSet, TimeExpandedNetwork,
};
