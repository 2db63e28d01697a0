//! Process exit codes.

use std::fmt;

use fleetplan::mapf::PlanError;
use fleetplan::post::PostError;
use fleetplan::sim::SimError;
use fleetplan::world::WorldError;

pub const OK: i32 = 0;
pub const INVALID_INPUT: i32 = 2;
pub const INFEASIBLE: i32 = 3;
pub const TIMEOUT: i32 = 4;
pub const EXECUTION_FAILURE: i32 = 5;

/// Bad user input that has no more specific error type.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

/// Execution stopped before every robot arrived.
#[derive(Debug)]
pub struct ExecutionFailure(pub String);

impl fmt::Display for ExecutionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "execution failed: {}", self.0)
    }
}

impl std::error::Error for ExecutionFailure {}

fn plan_code(e: &PlanError) -> i32 {
    match e {
        PlanError::Infeasible => INFEASIBLE,
        PlanError::Timeout => TIMEOUT,
        _ => INVALID_INPUT,
    }
}

fn post_code(e: &PostError) -> i32 {
    match e {
        PostError::Inconsistent { .. } | PostError::CapTooTight { .. } => INFEASIBLE,
        _ => INVALID_INPUT,
    }
}

/// Exit code for the first classified error in the chain.
pub fn code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<PlanError>() {
            return plan_code(e);
        }
        if let Some(e) = cause.downcast_ref::<PostError>() {
            return post_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return match e {
                SimError::Plan(p) => plan_code(p),
                SimError::Post(p) => post_code(p),
                SimError::InvalidConfig(_) => INVALID_INPUT,
            };
        }
        if cause.is::<ExecutionFailure>() {
            return EXECUTION_FAILURE;
        }
        if cause.is::<InvalidInput>()
            || cause.is::<WorldError>()
            || cause.is::<serde_json::Error>()
            || cause.is::<std::io::Error>()
        {
            return INVALID_INPUT;
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn classification() {
        let e = anyhow::Error::new(PlanError::Infeasible).context("planning");
        assert_eq!(code_for(&e), INFEASIBLE);
        let e: anyhow::Error = SimError::Plan(PlanError::Timeout).into();
        assert_eq!(code_for(&e), TIMEOUT);
        let e: anyhow::Error = PostError::InvalidDelta(-1.0).into();
        assert_eq!(code_for(&e), INVALID_INPUT);
        let e: anyhow::Error = ExecutionFailure("stuck".into()).into();
        assert_eq!(code_for(&e), EXECUTION_FAILURE);
        let e = Err::<(), _>(InvalidInput("x".into()))
            .context("loading")
            .unwrap_err();
        assert_eq!(code_for(&e), INVALID_INPUT);
        assert_eq!(code_for(&anyhow::anyhow!("other")), 1);
    }
}
