//! Primal heuristics: the rank-2 angular relaxation, Kernighan–Lin local
//! search and spanning-tree rounding of LP points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CutSolution, WeightedGraph};

const GRAD_TOL: f64 = 1e-4;
const MAX_SWEEPS: usize = 300;
const PERTURBATION: f64 = PI / 10.0;
const IMPROVE_TOL: f64 = 1e-9;

pub const DEFAULT_RESTARTS: usize = 8;

/// Vertex angles of the rank-2 relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularState {
    pub theta: Vec<f64>,
}

impl AngularState {
    pub fn from_cut(cut: &CutSolution) -> Self {
        AngularState { theta: cut.sides.iter().map(|&s| if s { PI } else { 0.0 }).collect() }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        AngularState { theta: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect() }
    }

    /// `Σ_{uv} w(uv) cos(θ_u - θ_v)`.
    pub fn energy(&self, g: &WeightedGraph) -> f64 {
        g.edges().iter().map(|e| e.w * (self.theta[e.u] - self.theta[e.v]).cos()).sum()
    }

    /// Coordinate descent: each vertex jumps to the angle minimizing its
    /// part of the energy. Stops when every partial derivative is below the
    /// tolerance or after the sweep cap. Returns the sweeps done.
    pub fn minimize(&mut self, g: &WeightedGraph) -> usize {
        for sweep in 1..=MAX_SWEEPS {
            let mut max_grad: f64 = 0.0;
            for v in 0..g.vertex_count() {
                let (mut a, mut b) = (0.0, 0.0);
                for arc in g.neighbors(v) {
                    let t = self.theta[arc.head];
                    a += arc.weight * t.cos();
                    b += arc.weight * t.sin();
                }
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                let t = self.theta[v];
                max_grad = max_grad.max((b * t.cos() - a * t.sin()).abs());
                self.theta[v] = (-b).atan2(-a).rem_euclid(TAU);
            }
            if max_grad < GRAD_TOL {
                return sweep;
            }
        }
        MAX_SWEEPS
    }

    /// Best cut among the half-planes bounded by a line through the origin,
    /// one candidate per vertex angle, updated by single flips.
    pub fn best_cut(&self, g: &WeightedGraph) -> CutSolution {
        let n = g.vertex_count();
        let theta: Vec<f64> = self.theta.iter().map(|t| t.rem_euclid(TAU)).collect();
        let mut sides: Vec<bool> = theta.iter().map(|&t| t < PI).collect();
        let mut weight = crate::graph::cut_weight(g, &sides);
        let mut best = (weight, sides.clone());
        // Rotating the half-plane by α ∈ [0, π) flips each vertex once.
        let event = |t: f64| if t < PI { t } else { t - PI };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| event(theta[a]).total_cmp(&event(theta[b])).then(a.cmp(&b)));
        for v in order {
            weight += flip_gain(g, &sides, v);
            sides[v] = !sides[v];
            if weight > best.0 + IMPROVE_TOL {
                best = (weight, sides.clone());
            }
        }
        CutSolution::new(g, best.1)
    }
}

/// Change in cut weight from moving `v` to the other side.
fn flip_gain(g: &WeightedGraph, sides: &[bool], v: usize) -> f64 {
    g.neighbors(v).iter().map(|a| if sides[a.head] == sides[v] { a.weight } else { -a.weight }).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GainEntry {
    gain: f64,
    vertex: usize,
    stamp: u32,
}

impl Eq for GainEntry {}

impl Ord for GainEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for GainEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Kernighan–Lin passes with single-vertex moves: each pass flips every
/// vertex once in order of best current gain, then keeps the best prefix.
/// Passes repeat while they improve.
pub fn kernighan_lin(g: &WeightedGraph, y: &CutSolution) -> CutSolution {
    let n = g.vertex_count();
    let mut sides = y.sides.clone();
    let mut gain: Vec<f64> = (0..n).map(|v| flip_gain(g, &sides, v)).collect();
    let mut stamp = vec![0u32; n];
    loop {
        let mut locked = vec![false; n];
        let mut heap: BinaryHeap<GainEntry> = (0..n).map(|v| GainEntry { gain: gain[v], vertex: v, stamp: stamp[v] }).collect();
        let mut moves = Vec::with_capacity(n);
        let (mut total, mut best_total, mut best_len) = (0.0, 0.0, 0);
        while let Some(top) = heap.pop() {
            let v = top.vertex;
            if locked[v] || top.stamp != stamp[v] {
                continue;
            }
            locked[v] = true;
            total += gain[v];
            sides[v] = !sides[v];
            gain[v] = -gain[v];
            moves.push(v);
            for a in g.neighbors(v) {
                let u = a.head;
                // The edge switched between cut and uncut.
                let delta = if sides[u] == sides[v] { 2.0 * a.weight } else { -2.0 * a.weight };
                gain[u] += delta;
                stamp[u] += 1;
                if !locked[u] {
                    heap.push(GainEntry { gain: gain[u], vertex: u, stamp: stamp[u] });
                }
            }
            if total > best_total + IMPROVE_TOL {
                best_total = total;
                best_len = moves.len();
            }
        }
        for &v in moves[best_len..].iter().rev() {
            sides[v] = !sides[v];
        }
        if best_len == 0 {
            break;
        }
        for v in 0..n {
            gain[v] = flip_gain(g, &sides, v);
        }
    }
    let out = CutSolution::new(g, sides);
    if out.weight >= y.weight {
        out
    } else {
        y.clone()
    }
}

/// Rank-2 heuristic with `restarts` descents: the first from `init` (or
/// random angles), later ones from the best angles so far perturbed by up
/// to π/10 per vertex. The best extracted cut is polished by
/// [`kernighan_lin`].
pub fn burer_rank2(g: &WeightedGraph, seed: u64, init: Option<&CutSolution>, restarts: usize) -> CutSolution {
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = match init {
        Some(c) => AngularState::from_cut(c),
        None => AngularState::random(n, &mut rng),
    };
    if init.is_some() {
        // Exact 0/π angles sit on a stationary point; nudge them off it.
        for t in &mut state.theta {
            *t += rng.gen_range(-PERTURBATION..PERTURBATION);
        }
    }
    let mut best_cut = init.cloned().unwrap_or_else(|| CutSolution::empty(g));
    let mut best_angles = state.clone();
    let mut best_energy = f64::INFINITY;
    for r in 0..restarts.max(1) {
        if r > 0 {
            state = best_angles.clone();
            for t in &mut state.theta {
                *t += rng.gen_range(-PERTURBATION..PERTURBATION);
            }
        }
        state.minimize(g);
        let cut = state.best_cut(g);
        let energy = state.energy(g);
        if energy < best_energy {
            best_energy = energy;
            best_angles = state.clone();
        }
        if cut.weight > best_cut.weight {
            best_cut = cut;
        }
    }
    kernighan_lin(g, &best_cut)
}

/// Rounds an LP point along a maximum spanning forest of the confidences
/// `|x(e) - 1/2|`, then applies [`kernighan_lin`].
pub fn spanning_tree_rounding(g: &WeightedGraph, x: &[f64]) -> CutSolution {
    kernighan_lin(g, &CutSolution::new(g, tree_round(g, x)))
}

/// Tree roots get side 0 and each tree edge is cut iff `x(e) > 1/2`.
fn tree_round(g: &WeightedGraph, x: &[f64]) -> Vec<bool> {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by(|&a, &b| (x[b] - 0.5).abs().total_cmp(&(x[a] - 0.5).abs()).then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut tree: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for e in order {
        let ed = g.edge(e);
        let (ru, rv) = (find(&mut parent, ed.u), find(&mut parent, ed.v));
        if ru != rv {
            parent[ru] = rv;
            let cross = x[e] > 0.5;
            tree[ed.u].push((ed.v, cross));
            tree[ed.v].push((ed.u, cross));
        }
    }
    let mut sides = vec![false; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &(u, cross) in &tree[v] {
                if !seen[u] {
                    seen[u] = true;
                    sides[u] = sides[v] ^ cross;
                    stack.push(u);
                }
            }
        }
    }
    sides
}
