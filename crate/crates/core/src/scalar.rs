use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for positions, lengths and times.
///
/// Implemented for `f32` and `f64`. The discrete planners never touch it;
/// only geometry, temporal networks and the simulator are generic over it.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("scalar conversion")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("scalar conversion")
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// 2D point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, serde::Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point at fraction `frac` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Self, frac: S) -> Self {
        Self {
            x: self.x + (other.x - self.x) * frac,
            y: self.y + (other.y - self.y) * frac,
        }
    }

    /// Move from `self` toward `other` by `dist` meters, never overshooting.
    pub fn toward(&self, other: &Self, dist: S) -> Self {
        let total = self.distance(other);
        if total <= dist || total <= S::zero() {
            *other
        } else {
            self.lerp(other, dist / total)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn heading_to(&self, other: &Self) -> Option<S> {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        if dx == S::zero() && dy == S::zero() {
            None
        } else {
            Some(dy.atan2(dx))
        }
    }
}

/// Absolute difference between two headings, folded into `[0, pi]`.
pub fn heading_change<S: Scalar>(from: S, to: S) -> S {
    let two_pi = S::of(std::f64::consts::TAU);
    let mut d = (to - from).abs() % two_pi;
    if d > S::of(std::f64::consts::PI) {
        d = two_pi - d;
    }
    d
}
