//! Independent oracles and instance generators shared by integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use fleetplan::world::{GraphBuilder, GridMap, RobotSpec, Team};
use fleetplan::{Graph, VertexId};
use fleetplan::{MapfInstance, TapfInstance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three or more robots each moving into the vertex the next one leaves.
fn rotates(state: &[VertexId], next: &[VertexId]) -> bool {
    (0..state.len()).any(|start| {
        let mut cur = start;
        for len in 1..=state.len() {
            if state[cur] == next[cur] {
                return false;
            }
            let Some(succ) = (0..state.len()).find(|&r| r != cur && state[r] == next[cur]) else {
                return false;
            };
            if succ == start {
                return len >= 3;
            }
            cur = succ;
        }
        false
    })
}

fn joint_successors(graph: &Graph, state: &[VertexId], frozen: &[bool]) -> Vec<Vec<VertexId>> {
    let mut out: Vec<Vec<VertexId>> = vec![Vec::new()];
    for (i, &v) in state.iter().enumerate() {
        let options: Vec<VertexId> = if frozen[i] {
            vec![v]
        } else {
            std::iter::once(v)
                .chain(graph.neighbors(v).iter().map(|&(w, _)| w))
                .collect()
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&w| {
                    let mut p = prefix.clone();
                    p.push(w);
                    p
                })
            })
            .collect();
    }
    out.retain(|next| {
        for a in 0..next.len() {
            for b in a + 1..next.len() {
                if next[a] == next[b] || (next[a] == state[b] && next[b] == state[a]) {
                    return false;
                }
            }
        }
        !rotates(state, next)
    });
    out
}

/// Optimal makespan by breadth-first search over joint robot positions.
pub fn joint_bfs_makespan(instance: &MapfInstance) -> Option<usize> {
    let start: Vec<VertexId> = instance.starts();
    let goal: Vec<VertexId> = instance.targets();
    let frozen = vec![false; start.len()];
    let mut dist: HashMap<Vec<VertexId>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start.clone(), 0);
    queue.push_back(start);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if s == goal {
            return Some(d);
        }
        for n in joint_successors(&instance.graph, &s, &frozen) {
            if !dist.contains_key(&n) {
                dist.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Optimal flowtime: uniform-cost search over (positions, finished flags),
/// where a robot may declare itself finished at its target and then never
/// moves again. Each step costs the number of unfinished robots.
pub fn joint_flowtime(instance: &MapfInstance) -> Option<usize> {
    let n = instance.num_robots();
    let goal: Vec<VertexId> = instance.targets();
    let start = (instance.starts(), vec![false; n]);
    let mut best: HashMap<(Vec<VertexId>, Vec<bool>), usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.clone(), 0);
    heap.push(Reverse((0usize, start)));
    let mut done = HashSet::new();
    while let Some(Reverse((c, (pos, fin)))) = heap.pop() {
        if !done.insert((pos.clone(), fin.clone())) {
            continue;
        }
        if fin.iter().all(|&f| f) {
            return Some(c);
        }
        // Optionally finish any subset of robots currently at their target.
        let eligible: Vec<usize> = (0..n).filter(|&i| !fin[i] && pos[i] == goal[i]).collect();
        for mask in 0..(1u32 << eligible.len()) {
            let mut f = fin.clone();
            for (k, &i) in eligible.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    f[i] = true;
                }
            }
            if f.iter().all(|&x| x) {
                let key = (pos.clone(), f);
                if best.get(&key).is_none_or(|&b| c < b) {
                    best.insert(key.clone(), c);
                    heap.push(Reverse((c, key)));
                }
                continue;
            }
            let step = f.iter().filter(|&&x| !x).count();
            for next in joint_successors(&instance.graph, &pos, &f) {
                let key = (next, f.clone());
                let nc = c + step;
                if best.get(&key).is_none_or(|&b| nc < b) {
                    best.insert(key.clone(), nc);
                    heap.push(Reverse((nc, key)));
                }
            }
        }
    }
    None
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every per-team bijection of starts to targets.
pub fn all_assignments(instance: &TapfInstance) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for team in &instance.teams {
        let perms = permutations(team.len());
        out = out
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut a = prefix.clone();
                    a.push(p.clone());
                    a
                })
            })
            .collect();
    }
    out
}

/// Minimum over all assignments of the joint-BFS optimal makespan.
pub fn assignment_oracle(instance: &TapfInstance) -> Option<usize> {
    all_assignments(instance)
        .into_iter()
        .filter_map(|a| joint_bfs_makespan(&fleetplan::tapf::tapf_to_mapf(instance, &a).unwrap()))
        .min()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with at most `max_vertices` vertices: either a grid with
/// random obstacles or a random tree plus chords, laid out on a circle.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize) -> Graph {
    if rng.gen_bool(0.5) {
        loop {
            let w = rng.gen_range(2..=4usize);
            let h = rng.gen_range(2..=(max_vertices / w).clamp(2, 4));
            let rows: Vec<String> = (0..h)
                .map(|_| {
                    (0..w)
                        .map(|_| if rng.gen_bool(0.2) { '@' } else { '.' })
                        .collect()
                })
                .collect();
            let Ok(grid) = GridMap::from_rows(&rows) else {
                continue;
            };
            if grid.passable_count() >= 3 {
                return grid.to_graph().unwrap();
            }
        }
    }
    let n = rng.gen_range(3..=max_vertices);
    let mut b = GraphBuilder::new();
    let ids: Vec<VertexId> = (0..n)
        .map(|i| {
            let a = i as f64 / n as f64 * std::f64::consts::TAU;
            b.vertex(format!("n{i}"), 3.0 * a.cos(), 3.0 * a.sin())
        })
        .collect();
    let mut edges = HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.insert((j, i));
    }
    for _ in 0..rng.gen_range(0..n) {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort();
    for (i, j) in edges {
        b.edge(ids[i], ids[j], 1.0);
    }
    b.build().unwrap()
}

pub fn random_mapf(rng: &mut ChaCha8Rng, max_robots: usize, max_vertices: usize) -> MapfInstance {
    let graph = random_graph(rng, max_vertices);
    let mut vs: Vec<VertexId> = graph.vertices().collect();
    let k = rng.gen_range(1..=max_robots.min(vs.len() / 2).max(1));
    vs.shuffle(rng);
    let starts = vs[..k].to_vec();
    vs.shuffle(rng);
    let targets = vs[..k].to_vec();
    let robots = starts
        .into_iter()
        .zip(targets)
        .map(|(start, target)| RobotSpec { start, target })
        .collect();
    MapfInstance::new(graph, robots)
}

pub fn random_tapf(rng: &mut ChaCha8Rng, max_robots: usize, max_vertices: usize) -> TapfInstance {
    let m = random_mapf(rng, max_robots, max_vertices);
    let n = m.num_robots();
    let teams = if n >= 2 {
        rng.gen_range(1..=2usize.min(n))
    } else {
        1
    };
    let split = if teams == 2 { rng.gen_range(1..n) } else { n };
    let chunks = [(0, split), (split, n)];
    let teams = chunks[..teams]
        .iter()
        .map(|&(a, b)| Team {
            starts: m.robots[a..b].iter().map(|r| r.start).collect(),
            targets: m.robots[a..b].iter().map(|r| r.target).collect(),
        })
        .collect();
    TapfInstance::new(m.graph, teams)
}
