use serde::{Deserialize, Serialize};

use super::SimError;
use crate::scalar::Scalar;

/// Per-robot replacement of the global delay parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct DelayOverride<S: Scalar> {
    pub robot: usize,
    pub p: S,
    pub f: S,
}

/// The robot does not move during `[from, until)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct Stop<S: Scalar> {
    pub robot: usize,
    pub from: S,
    pub until: S,
}

/// Each tick a robot is delayed with probability `p`; a delayed robot
/// moves at `f` times its commanded speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct DelayModel<S: Scalar> {
    pub p: S,
    pub f: S,
    pub overrides: Vec<DelayOverride<S>>,
    pub stops: Vec<Stop<S>>,
}

impl<S: Scalar> Default for DelayModel<S> {
    fn default() -> Self {
        Self::none()
    }
}

impl<S: Scalar> DelayModel<S> {
    pub fn none() -> Self {
        Self::new(S::zero(), S::of(0.5))
    }

    pub fn new(p: S, f: S) -> Self {
        Self {
            p,
            f,
            overrides: Vec::new(),
            stops: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let check = |p: S, f: S| {
            if !(p >= S::zero() && p <= S::one()) {
                return Err(SimError::InvalidConfig(format!(
                    "delay probability {p} outside [0, 1]"
                )));
            }
            if !(f >= S::zero() && f < S::one()) {
                return Err(SimError::InvalidConfig(format!(
                    "delay speed factor {f} outside [0, 1)"
                )));
            }
            Ok(())
        };
        check(self.p, self.f)?;
        for o in &self.overrides {
            check(o.p, o.f)?;
        }
        for s in &self.stops {
            if !(s.from <= s.until) {
                return Err(SimError::InvalidConfig(format!(
                    "stop interval {}..{} is reversed",
                    s.from, s.until
                )));
            }
        }
        Ok(())
    }

    fn params(&self, robot: usize) -> (S, S) {
        self.overrides
            .iter()
            .rev()
            .find(|o| o.robot == robot)
            .map_or((self.p, self.f), |o| (o.p, o.f))
    }

    /// Speed multiplier for one tick given the robot's uniform draw, and
    /// whether the robot counts as delayed.
    pub fn factor(&self, robot: usize, clock: S, draw: S) -> (S, bool) {
        if self
            .stops
            .iter()
            .any(|s| s.robot == robot && clock >= s.from && clock < s.until)
        {
            return (S::zero(), true);
        }
        let (p, f) = self.params(robot);
        if draw < p {
            (f, true)
        } else {
            (S::one(), false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors() {
        let mut d = DelayModel::new(0.2, 0.5);
        assert_eq!(d.factor(0, 0.0, 0.1), (0.5, true));
        assert_eq!(d.factor(0, 0.0, 0.3), (1.0, false));
        d.overrides.push(DelayOverride {
            robot: 1,
            p: 1.0,
            f: 0.0,
        });
        assert_eq!(d.factor(1, 0.0, 0.99), (0.0, true));
        d.stops.push(Stop {
            robot: 0,
            from: 1.0,
            until: 2.0,
        });
        assert_eq!(d.factor(0, 1.5, 0.9), (0.0, true));
        assert_eq!(d.factor(0, 2.0, 0.9), (1.0, false));
    }

    #[test]
    fn ranges() {
        assert!(DelayModel::new(1.0, 0.0).validate().is_ok());
        assert!(DelayModel::new(1.1, 0.5).validate().is_err());
        assert!(DelayModel::new(0.5, 1.0).validate().is_err());
    }
}
