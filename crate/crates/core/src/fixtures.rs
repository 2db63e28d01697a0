//! Small canonical instances shared by tests, benches and the CLI.

use crate::scalar::Scalar;
use crate::world::{DiscretePlan, Graph, GraphBuilder, TapfInstance, Team, VertexId};

/// Nine vertices `A`..`I` laid out on unit spacing:
///
/// ```text
///  A - B       C - D
///      |       |
///  E - F - G - H - I
/// ```
pub fn two_team_graph<S: Scalar>() -> Graph<S> {
    let mut b = GraphBuilder::new();
    let coords = [
        ("A", 0.0, 1.0),
        ("B", 1.0, 1.0),
        ("C", 3.0, 1.0),
        ("D", 4.0, 1.0),
        ("E", 0.0, 0.0),
        ("F", 1.0, 0.0),
        ("G", 2.0, 0.0),
        ("H", 3.0, 0.0),
        ("I", 4.0, 0.0),
    ];
    for (n, x, y) in coords {
        b.vertex(n, S::of(x), S::of(y));
    }
    let v = |n: &str| VertexId(coords.iter().position(|c| c.0 == n).unwrap());
    for (a, c) in [
        ("A", "B"),
        ("B", "F"),
        ("E", "F"),
        ("F", "G"),
        ("G", "H"),
        ("H", "I"),
        ("H", "C"),
        ("C", "D"),
    ] {
        b.edge(v(a), v(c), S::one());
    }
    b.build().expect("fixture graph")
}

/// Team 0: a single robot `A -> H`. Team 1: starts `E, F`, targets `D, I`.
pub fn two_team_instance<S: Scalar>() -> TapfInstance<S> {
    let g = two_team_graph::<S>();
    let v = |n: &str| g.lookup(n).unwrap();
    let teams = vec![
        Team {
            starts: vec![v("A")],
            targets: vec![v("H")],
        },
        Team {
            starts: vec![v("E"), v("F")],
            targets: vec![v("D"), v("I")],
        },
    ];
    TapfInstance::new(g, teams)
}

/// The known makespan-4 plan for [`two_team_instance`].
pub fn two_team_plan<S: Scalar>(graph: &Graph<S>) -> DiscretePlan {
    let rows = [
        ["A", "B", "F", "G", "H"],
        ["E", "F", "G", "H", "I"],
        ["F", "G", "H", "C", "D"],
    ];
    DiscretePlan::new(
        rows.iter()
            .map(|r| r.iter().map(|n| graph.lookup(n).unwrap()).collect())
            .collect(),
    )
}
