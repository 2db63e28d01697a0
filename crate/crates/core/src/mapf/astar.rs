use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};

use super::constraint::ConstraintTable;
use super::{HighwaySet, PlanError, SpaceTimeConstraint};
use crate::scalar::Scalar;
use crate::world::{Graph, VertexId};

/// Total-ordered `f64` for heap keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cost(pub f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Action costs for the low-level search.
#[derive(Debug, Clone, Copy)]
pub enum CostModel<'a> {
    /// Every move and every wait costs 1.
    Unit,
    /// Moves opposing a highway cost `weight`; everything else costs 1.
    Highways {
        highways: &'a HighwaySet,
        weight: f64,
    },
}

impl CostModel<'_> {
    pub fn move_cost(&self, from: VertexId, to: VertexId) -> f64 {
        match self {
            CostModel::Unit => 1.0,
            CostModel::Highways { highways, weight } => {
                if highways.opposes(from, to) {
                    *weight
                } else {
                    1.0
                }
            }
        }
    }

    pub fn wait_cost(&self) -> f64 {
        1.0
    }

    /// Exact cost-to-go to `target` from every vertex, ignoring time.
    pub fn cost_to_go<S: Scalar>(&self, graph: &Graph<S>, target: VertexId) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; graph.num_vertices()];
        let mut heap = BinaryHeap::new();
        dist[target.0] = 0.0;
        heap.push(Reverse((Cost(0.0), target)));
        while let Some(Reverse((Cost(d), v))) = heap.pop() {
            if d > dist[v.0] {
                continue;
            }
            for &(u, _) in graph.neighbors(v) {
                let nd = d + self.move_cost(u, v);
                if nd < dist[u.0] {
                    dist[u.0] = nd;
                    heap.push(Reverse((Cost(nd), u)));
                }
            }
        }
        dist
    }
}

/// Low-level search result: one vertex per timestep, ending at the target.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub vertices: Vec<VertexId>,
    pub cost: f64,
}

fn descend<S: Scalar>(
    graph: &Graph<S>,
    model: &CostModel,
    h: &[f64],
    target: VertexId,
    mut v: VertexId,
    out: &mut Vec<VertexId>,
) {
    while v != target {
        let next = graph
            .neighbors(v)
            .iter()
            .map(|&(w, _)| w)
            .min_by(|&a, &b| {
                (model.move_cost(v, a) + h[a.0])
                    .total_cmp(&(model.move_cost(v, b) + h[b.0]))
                    .then(a.cmp(&b))
            })
            .expect("finite cost-to-go implies a neighbor");
        out.push(next);
        v = next;
    }
}

struct Node {
    v: VertexId,
    g: f64,
    parent: Option<usize>,
}

fn unwind(arena: &[Node], mut id: usize) -> Vec<VertexId> {
    let mut out = Vec::new();
    loop {
        out.push(arena[id].v);
        match arena[id].parent {
            Some(p) => id = p,
            None => break,
        }
    }
    out.reverse();
    out
}

/// Minimum-cost single-robot path under space-time constraints.
///
/// `constraints` for other robots are ignored. Ties on `f` prefer the smaller
/// timestep, then the smaller vertex id, then waiting over moving. Once past
/// the latest constraint the remainder is completed along the static
/// cost-to-go, so the timestep dimension only spans the constrained prefix.
pub fn space_time_astar<S: Scalar>(
    graph: &Graph<S>,
    start: VertexId,
    target: VertexId,
    constraints: &[SpaceTimeConstraint],
    cost_model: &CostModel,
    horizon: usize,
) -> Result<Path, PlanError> {
    let h = cost_model.cost_to_go(graph, target);
    let table = ConstraintTable::new(constraints);
    search(graph, start, target, &table, cost_model, &h, horizon).ok_or(PlanError::Infeasible)
}

pub(crate) fn search<S: Scalar>(
    graph: &Graph<S>,
    start: VertexId,
    target: VertexId,
    table: &ConstraintTable,
    model: &CostModel,
    h: &[f64],
    horizon: usize,
) -> Option<Path> {
    if !h[start.0].is_finite() || !table.allows(start, start, 0) {
        return None;
    }
    let hops = graph.hop_distances(target);
    let mut arena = vec![Node {
        v: start,
        g: 0.0,
        parent: None,
    }];
    let mut open = BinaryHeap::new();
    let mut best: HashMap<(VertexId, usize), f64> = HashMap::new();
    let mut closed: HashSet<(VertexId, usize)> = HashSet::new();
    best.insert((start, 0), 0.0);
    open.push(Reverse((Cost(h[start.0]), 0usize, start, false, 0usize)));
    while let Some(Reverse((_, t, v, _, id))) = open.pop() {
        if !closed.insert((v, t)) {
            continue;
        }
        let g = arena[id].g;
        if v == target && table.can_rest(v, t) {
            return Some(Path {
                vertices: unwind(&arena, id),
                cost: g,
            });
        }
        if t >= table.latest {
            if t + hops[v.0] <= horizon {
                let mut vertices = unwind(&arena, id);
                descend(graph, model, h, target, v, &mut vertices);
                return Some(Path {
                    vertices,
                    cost: g + h[v.0],
                });
            }
            continue;
        }
        if t + 1 > horizon {
            continue;
        }
        let succ = std::iter::once((v, model.wait_cost(), false)).chain(
            graph
                .neighbors(v)
                .iter()
                .map(|&(w, _)| (w, model.move_cost(v, w), true)),
        );
        for (w, c, is_move) in succ {
            if !h[w.0].is_finite() || !table.allows(v, w, t + 1) || closed.contains(&(w, t + 1)) {
                continue;
            }
            let ng = g + c;
            let key = (w, t + 1);
            if best.get(&key).is_some_and(|&b| b <= ng) {
                continue;
            }
            best.insert(key, ng);
            arena.push(Node {
                v: w,
                g: ng,
                parent: Some(id),
            });
            open.push(Reverse((
                Cost(ng + h[w.0]),
                t + 1,
                w,
                is_move,
                arena.len() - 1,
            )));
        }
    }
    None
}

/// Other robots' paths, indexed for conflict counting.
#[derive(Debug, Default)]
pub(crate) struct Reservations {
    occupied: HashMap<(VertexId, usize), u32>,
    moves: HashMap<(VertexId, VertexId, usize), u32>,
    parked: HashMap<VertexId, Vec<usize>>,
    visits: HashMap<VertexId, Vec<usize>>,
    /// Where a robot leaving a vertex arrives, by departure vertex and
    /// arrival time.
    leaving: HashMap<(VertexId, usize), VertexId>,
    robots: usize,
}

impl Reservations {
    pub fn new<'a>(paths: impl IntoIterator<Item = &'a [VertexId]>) -> Self {
        let mut r = Self::default();
        for p in paths {
            r.robots += 1;
            let last = p.len() - 1;
            for (t, &v) in p.iter().enumerate().take(last) {
                *r.occupied.entry((v, t)).or_insert(0) += 1;
                r.visits.entry(v).or_default().push(t);
                if p[t + 1] != v {
                    *r.moves.entry((v, p[t + 1], t + 1)).or_insert(0) += 1;
                    r.leaving.insert((v, t + 1), p[t + 1]);
                }
            }
            r.parked.entry(p[last]).or_default().push(last);
        }
        for times in r.visits.values_mut() {
            times.sort_unstable();
        }
        r
    }

    /// Conflicts incurred by moving `from -> to` arriving at `t`.
    pub fn step_conflicts(&self, from: VertexId, to: VertexId, t: usize) -> u32 {
        let mut n = self.occupied.get(&(to, t)).copied().unwrap_or(0);
        if let Some(p) = self.parked.get(&to) {
            n += p.iter().filter(|&&s| s <= t).count() as u32;
        }
        if from != to {
            n += self.moves.get(&(to, from, t)).copied().unwrap_or(0);
            n += u32::from(self.closes_rotation(from, to, t));
        }
        n
    }

    /// Following the robots that vacate `to`, then their targets, leads back
    /// into `from` through at least two others.
    fn closes_rotation(&self, from: VertexId, to: VertexId, t: usize) -> bool {
        let mut cur = to;
        for step in 0..self.robots {
            match self.leaving.get(&(cur, t)) {
                Some(&next) if next == from => return step >= 1,
                Some(&next) => cur = next,
                None => return false,
            }
        }
        false
    }

    /// Conflicts incurred by resting at `v` for every timestep after `t`.
    pub fn rest_conflicts(&self, v: VertexId, t: usize) -> u32 {
        let later = self
            .visits
            .get(&v)
            .map_or(0, |times| times.len() - times.partition_point(|&s| s <= t));
        let parked = self
            .parked
            .get(&v)
            .map_or(0, |p| p.iter().filter(|&&s| s > t).count());
        (later + parked) as u32
    }
}

struct FocalNode {
    v: VertexId,
    t: usize,
    conflicts: u32,
    pref_g: f64,
    parent: Option<usize>,
}

/// Bounded-suboptimal low-level search.
///
/// Explores only states with `t + hops_to_go <= bound`, so every returned
/// path arrives by `bound`. Among those, expands by fewest conflicts with
/// `others`, then smallest preference cost (`pref` model), then timestep and
/// vertex id.
#[allow(clippy::too_many_arguments)]
pub(crate) fn focal_search<S: Scalar>(
    graph: &Graph<S>,
    start: VertexId,
    target: VertexId,
    table: &ConstraintTable,
    others: &Reservations,
    bound: usize,
    hops: &[usize],
    pref: &CostModel,
    pref_h: &[f64],
) -> Option<Path> {
    if hops[start.0] == usize::MAX || hops[start.0] > bound || !table.allows(start, start, 0) {
        return None;
    }
    let mut arena = vec![FocalNode {
        v: start,
        t: 0,
        conflicts: others.step_conflicts(start, start, 0),
        pref_g: 0.0,
        parent: None,
    }];
    type Key = (u32, Cost, usize, bool, VertexId, bool, usize);
    let mut open: BinaryHeap<Reverse<Key>> = BinaryHeap::new();
    let mut best: HashMap<(VertexId, usize), (u32, Cost)> = HashMap::new();
    let mut closed: HashSet<(VertexId, usize)> = HashSet::new();
    let push_state = |arena: &Vec<FocalNode>, open: &mut BinaryHeap<Reverse<Key>>, id: usize| {
        let n = &arena[id];
        open.push(Reverse((
            n.conflicts,
            Cost(n.pref_g + pref_h[n.v.0]),
            n.t,
            true,
            n.v,
            false,
            id,
        )));
        if n.v == target && table.can_rest(n.v, n.t) {
            let total = n.conflicts + others.rest_conflicts(n.v, n.t);
            open.push(Reverse((total, Cost(n.pref_g), n.t, false, n.v, false, id)));
        }
    };
    best.insert((start, 0), (arena[0].conflicts, Cost(0.0)));
    push_state(&arena, &mut open, 0);
    while let Some(Reverse((_, _, t, expandable, v, _, id))) = open.pop() {
        if !expandable {
            return Some(Path {
                vertices: unwind_focal(&arena, id),
                cost: t as f64,
            });
        }
        if !closed.insert((v, t)) {
            continue;
        }
        let (conflicts, pref_g) = (arena[id].conflicts, arena[id].pref_g);
        let succ = std::iter::once((v, pref.wait_cost())).chain(
            graph
                .neighbors(v)
                .iter()
                .map(|&(w, _)| (w, pref.move_cost(v, w))),
        );
        for (w, c) in succ {
            let nt = t + 1;
            if hops[w.0] == usize::MAX
                || nt + hops[w.0] > bound
                || !table.allows(v, w, nt)
                || closed.contains(&(w, nt))
            {
                continue;
            }
            let nc = conflicts + others.step_conflicts(v, w, nt);
            let ng = Cost(pref_g + c);
            if best.get(&(w, nt)).is_some_and(|&b| b <= (nc, ng)) {
                continue;
            }
            best.insert((w, nt), (nc, ng));
            arena.push(FocalNode {
                v: w,
                t: nt,
                conflicts: nc,
                pref_g: ng.0,
                parent: Some(id),
            });
            push_state(&arena, &mut open, arena.len() - 1);
        }
    }
    None
}

fn unwind_focal(arena: &[FocalNode], mut id: usize) -> Vec<VertexId> {
    let mut out = Vec::new();
    loop {
        out.push(arena[id].v);
        match arena[id].parent {
            Some(p) => id = p,
            None => break,
        }
    }
    out.reverse();
    out
}
