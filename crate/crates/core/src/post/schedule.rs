use serde::{Deserialize, Serialize};

use crate::scalar::{Point, Scalar};
use crate::world::{RobotId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint<S: Scalar> {
    pub position: Point<S>,
    /// Arrival time in seconds.
    pub time: S,
    /// STN event this waypoint realizes.
    pub event: usize,
    /// Plan vertex, for arrivals; `None` for safety markers.
    pub vertex: Option<VertexId>,
    /// Turn-in-place time before leaving.
    pub dwell: S,
}

/// Arrival times per robot, plus the time of every STN event.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<S: Scalar> {
    robots: Vec<Vec<Waypoint<S>>>,
    times: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct WaypointDoc<S: Scalar> {
    pub x: S,
    pub y: S,
    pub t: S,
}

impl<S: Scalar> Schedule<S> {
    pub fn new(robots: Vec<Vec<Waypoint<S>>>, times: Vec<S>) -> Self {
        Self { robots, times }
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robot(&self, robot: RobotId) -> &[Waypoint<S>] {
        &self.robots[robot.0]
    }

    pub fn robots(&self) -> &[Vec<Waypoint<S>>] {
        &self.robots
    }

    pub fn event_times(&self) -> &[S] {
        &self.times
    }

    pub fn makespan(&self) -> S {
        self.robots
            .iter()
            .filter_map(|w| w.last())
            .map(|w| w.time)
            .fold(S::zero(), S::max)
    }

    /// Mean final arrival time.
    pub fn mean_arrival(&self) -> S {
        if self.robots.is_empty() {
            return S::zero();
        }
        let sum = self
            .robots
            .iter()
            .filter_map(|w| w.last())
            .map(|w| w.time)
            .fold(S::zero(), |a, b| a + b);
        sum / S::of_usize(self.robots.len())
    }

    /// JSON shape: one array of `{x, y, t}` per robot.
    pub fn to_doc(&self) -> Vec<Vec<WaypointDoc<S>>> {
        self.robots
            .iter()
            .map(|ws| {
                ws.iter()
                    .map(|w| WaypointDoc {
                        x: w.position.x,
                        y: w.position.y,
                        t: w.time,
                    })
                    .collect()
            })
            .collect()
    }

    /// Position under constant velocity between consecutive waypoints.
    pub fn position_at(&self, robot: RobotId, t: S) -> Point<S> {
        let ws = &self.robots[robot.0];
        let i = ws.partition_point(|w| w.time <= t);
        if i == 0 {
            return ws[0].position;
        }
        if i == ws.len() {
            return ws[i - 1].position;
        }
        let (a, b) = (&ws[i - 1], &ws[i]);
        let span = b.time - a.time;
        if span <= S::zero() {
            return b.position;
        }
        a.position.lerp(&b.position, (t - a.time) / span)
    }

    /// Minimum pairwise distance, sampling `per_arc` points inside every
    /// arc of every robot.
    pub fn min_pairwise_distance(&self, per_arc: usize) -> Option<S> {
        if self.robots.len() < 2 {
            return None;
        }
        let mut samples = Vec::new();
        for ws in &self.robots {
            for pair in ws.windows(2) {
                let (a, b) = (pair[0].time, pair[1].time);
                for k in 0..=per_arc {
                    samples.push(a + (b - a) * S::of_usize(k) / S::of_usize(per_arc.max(1)));
                }
            }
        }
        samples.push(S::zero());
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        samples.dedup();
        let mut best: Option<S> = None;
        for t in samples {
            let pos: Vec<Point<S>> = (0..self.robots.len())
                .map(|r| self.position_at(RobotId(r), t))
                .collect();
            for i in 0..pos.len() {
                for j in i + 1..pos.len() {
                    let d = pos[i].distance(&pos[j]);
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(x: f64, t: f64) -> Waypoint<f64> {
        Waypoint {
            position: Point::new(x, 0.0),
            time: t,
            event: 0,
            vertex: None,
            dwell: 0.0,
        }
    }

    #[test]
    fn interpolation() {
        let s = Schedule::new(
            vec![vec![wp(0.0, 0.0), wp(1.0, 2.0), wp(1.0, 3.0), wp(2.0, 4.0)]],
            vec![],
        );
        assert_eq!(s.position_at(RobotId(0), -1.0).x, 0.0);
        assert_eq!(s.position_at(RobotId(0), 1.0).x, 0.5);
        assert_eq!(s.position_at(RobotId(0), 2.5).x, 1.0);
        assert_eq!(s.position_at(RobotId(0), 3.5).x, 1.5);
        assert_eq!(s.position_at(RobotId(0), 9.0).x, 2.0);
        assert_eq!(s.makespan(), 4.0);
    }

    #[test]
    fn pairwise_distance() {
        let s = Schedule::new(
            vec![
                vec![wp(0.0, 0.0), wp(2.0, 2.0)],
                vec![wp(3.0, 0.0), wp(2.5, 1.0)],
            ],
            vec![],
        );
        // Closest once robot 0 stops at 2.0 next to 2.5.
        assert!((s.min_pairwise_distance(100).unwrap() - 0.5).abs() < 1e-12);
        let json = serde_json::to_string(&s.to_doc()).unwrap();
        assert!(json.starts_with(r#"[[{"x":0.0,"y":0.0,"t":0.0}"#));
    }
}
