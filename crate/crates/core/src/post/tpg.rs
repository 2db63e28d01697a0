use std::collections::BTreeMap;

use super::PostError;
use crate::scalar::Scalar;
use crate::world::{detect_conflicts, DiscretePlan, Graph, RobotId, VertexId};

/// "Robot `robot` arrives at `location` at `timestep`."
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TpgNode {
    pub robot: RobotId,
    pub timestep: usize,
    pub location: VertexId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    /// Consecutive events of one robot.
    Intra,
    /// A robot leaves a vertex before the next occupant arrives.
    Inter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TpgArc {
    pub from: usize,
    pub to: usize,
    pub kind: ArcKind,
}

/// Temporal plan graph: the partial order of arrival events in a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Tpg {
    nodes: Vec<TpgNode>,
    arcs: Vec<TpgArc>,
    chains: Vec<Vec<usize>>,
}

impl Tpg {
    pub fn nodes(&self) -> &[TpgNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[TpgArc] {
        &self.arcs
    }

    pub fn num_robots(&self) -> usize {
        self.chains.len()
    }

    /// Node ids of one robot's events in order.
    pub fn chain(&self, robot: RobotId) -> &[usize] {
        &self.chains[robot.0]
    }

    pub fn inter_arcs(&self) -> impl Iterator<Item = &TpgArc> {
        self.arcs.iter().filter(|a| a.kind == ArcKind::Inter)
    }

    /// Kahn's algorithm; `None` if the arcs contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        topological_order(self.nodes.len(), self.arcs.iter().map(|a| (a.from, a.to)))
    }
}

pub(crate) fn topological_order(
    n: usize,
    arcs: impl Iterator<Item = (usize, usize)>,
) -> Option<Vec<usize>> {
    let mut out_arcs = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (a, b) in arcs {
        out_arcs[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &w in &out_arcs[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Compile a conflict-free plan into its temporal plan graph.
///
/// Waits collapse into the preceding arrival. Precedence arcs link only
/// consecutive occupants of each vertex.
pub fn build_tpg<S: Scalar>(plan: &DiscretePlan, graph: &Graph<S>) -> Result<Tpg, PostError> {
    let conflicts = detect_conflicts(plan, graph)?;
    if !conflicts.is_empty() {
        return Err(PostError::Conflicted(conflicts.len()));
    }
    let mut nodes = Vec::new();
    let mut chains = Vec::with_capacity(plan.num_robots());
    for (r, path) in plan.paths().iter().enumerate() {
        let mut chain = Vec::new();
        for (t, &v) in path.iter().enumerate() {
            if t > 0 && path[t - 1] == v {
                continue;
            }
            chain.push(nodes.len());
            nodes.push(TpgNode {
                robot: RobotId(r),
                timestep: t,
                location: v,
            });
        }
        chains.push(chain);
    }
    let mut arcs = Vec::new();
    for chain in &chains {
        arcs.extend(chain.windows(2).map(|w| TpgArc {
            from: w[0],
            to: w[1],
            kind: ArcKind::Intra,
        }));
    }

    // Visits per vertex as (arrival step, robot, index in chain).
    let mut visits: BTreeMap<VertexId, Vec<(usize, usize, usize)>> = BTreeMap::new();
    for (r, chain) in chains.iter().enumerate() {
        for (i, &n) in chain.iter().enumerate() {
            visits
                .entry(nodes[n].location)
                .or_default()
                .push((nodes[n].timestep, r, i));
        }
    }
    for list in visits.values_mut() {
        list.sort();
        for w in list.windows(2) {
            let (_, j, ji) = w[0];
            let (_, k, ki) = w[1];
            if j == k {
                continue;
            }
            // A conflict-free plan never parks a robot where another comes later.
            let Some(&leave) = chains[j].get(ji + 1) else {
                return Err(PostError::Conflicted(1));
            };
            arcs.push(TpgArc {
                from: leave,
                to: chains[k][ki],
                kind: ArcKind::Inter,
            });
        }
    }
    Ok(Tpg {
        nodes,
        arcs,
        chains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{two_team_graph, two_team_plan};

    fn find(tpg: &Tpg, robot: usize, name: &str, g: &Graph<f64>) -> usize {
        let v = g.lookup(name).unwrap();
        *tpg.chain(RobotId(robot))
            .iter()
            .find(|&&n| tpg.nodes()[n].location == v)
            .unwrap()
    }

    #[test]
    fn known_plan_structure() {
        let g = two_team_graph::<f64>();
        let tpg = build_tpg(&two_team_plan(&g), &g).unwrap();
        assert_eq!(tpg.nodes().len(), 15);
        assert_eq!(
            tpg.arcs()
                .iter()
                .filter(|a| a.kind == ArcKind::Intra)
                .count(),
            12
        );
        let inter: Vec<(usize, usize)> = tpg.inter_arcs().map(|a| (a.from, a.to)).collect();
        assert_eq!(inter.len(), 6);
        // Robot 2 leaves G (arrives at H) before robot 1 arrives at G.
        assert!(inter.contains(&(find(&tpg, 2, "H", &g), find(&tpg, 1, "G", &g))));
        assert!(inter.contains(&(find(&tpg, 1, "G", &g), find(&tpg, 0, "F", &g))));
        let at: Vec<&str> = tpg
            .inter_arcs()
            .map(|a| g.name(tpg.nodes()[a.to].location))
            .collect();
        for v in ["F", "G", "H"] {
            assert_eq!(at.iter().filter(|&&n| n == v).count(), 2);
        }
        assert!(tpg.topological_order().is_some());
    }

    #[test]
    fn single_robot_chain() {
        let g = two_team_graph::<f64>();
        let v = |n| g.lookup(n).unwrap();
        let plan = DiscretePlan::new(vec![vec![v("A"), v("B"), v("B"), v("F"), v("G")]]);
        let tpg = build_tpg(&plan, &g).unwrap();
        assert_eq!(tpg.nodes().len(), 4);
        assert_eq!(tpg.arcs().len(), 3);
        assert_eq!(tpg.nodes()[2].timestep, 3);
    }

    #[test]
    fn disjoint_robots() {
        let g = two_team_graph::<f64>();
        let v = |n| g.lookup(n).unwrap();
        let plan = DiscretePlan::new(vec![vec![v("A"), v("B")], vec![v("I"), v("H"), v("C")]]);
        let tpg = build_tpg(&plan, &g).unwrap();
        assert_eq!(tpg.inter_arcs().count(), 0);
        assert_eq!(tpg.chain(RobotId(1)).len(), 3);
    }

    #[test]
    fn rejects_conflicts() {
        let g = two_team_graph::<f64>();
        let v = |n| g.lookup(n).unwrap();
        let plan = DiscretePlan::new(vec![vec![v("E"), v("F")], vec![v("G"), v("F")]]);
        assert!(matches!(
            build_tpg(&plan, &g),
            Err(PostError::Conflicted(_))
        ));
    }
}
