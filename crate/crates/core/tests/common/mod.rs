//! Instance generators and brute-force oracles shared by the integration
//! tests. Nothing here calls into the solver.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsecut::graph::WeightedGraph;
use sparsecut::io::RawQuboInstance;

/// Random simple graph with integer weights in `[-wmax, wmax]`; zero draws
/// are kept as edges of weight zero.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, wmax: i32) -> WeightedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < density {
                edges.push((a, b, rng.gen_range(-wmax..=wmax) as f64));
            }
        }
    }
    WeightedGraph::from_edges(n, edges)
}

/// The oracle-equivalence instance set: instance `i` is drawn from seed
/// `1000 + i` with `|V|` in `[6, 14]` and density in `[0.2, 0.8]`.
pub fn oracle_instance(i: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
    let n = rng.gen_range(6..=14);
    let density = rng.gen_range(0.2..=0.8);
    random_graph(&mut rng, n, density, 5)
}

fn sides_of(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// Weight of the cut `sides`, summed straight from the edge list.
pub fn weight_of(g: &WeightedGraph, sides: &[bool]) -> f64 {
    g.edges().iter().filter(|e| sides[e.u] != sides[e.v]).map(|e| e.w).sum()
}

/// Maximum cut by enumerating all `2^(n-1)` bipartitions.
pub fn brute_maxcut(g: &WeightedGraph) -> f64 {
    let n = g.vertex_count();
    if n <= 1 {
        return 0.0;
    }
    (0..1u64 << (n - 1)).map(|m| weight_of(g, &sides_of(m, n))).fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum cut among bipartitions that respect the per-edge fixings;
/// `None` if no bipartition does.
pub fn brute_maxcut_fixed(g: &WeightedGraph, bounds: &[Option<bool>]) -> Option<f64> {
    let n = g.vertex_count();
    if n == 0 {
        return Some(0.0);
    }
    (0..1u64 << (n - 1))
        .map(|m| sides_of(m, n))
        .filter(|y| g.edges().iter().zip(bounds).all(|(e, b)| b.is_none_or(|v| (y[e.u] != y[e.v]) == v)))
        .map(|y| weight_of(g, &y))
        .reduce(f64::max)
}

pub fn random_qubo(rng: &mut ChaCha8Rng, n: usize, density: f64) -> RawQuboInstance {
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j || rng.gen::<f64>() < density {
                let q = rng.gen_range(-5i32..=5) as f64;
                if q != 0.0 {
                    entries.push((i, j, q));
                }
            }
        }
    }
    RawQuboInstance::from_entries(n, entries)
}

/// `xᵀQx` with `Q` taken entry by entry.
pub fn qubo_value(q: &RawQuboInstance, x: &[bool]) -> f64 {
    q.entries.iter().filter(|e| x[e.i] && x[e.j]).map(|e| e.q).sum()
}

/// Minimum of `xᵀQx` over all `2^n` binary vectors.
pub fn brute_qubo_min(q: &RawQuboInstance) -> f64 {
    (0..1u64 << q.n).map(|m| qubo_value(q, &sides_of(m, q.n))).fold(f64::INFINITY, f64::min)
}

/// Every cycle of `g` as its edge list in traversal order, each reported
/// once. Exponential; meant for graphs with at most ten vertices.
pub fn all_cycles(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    // Cycles are rooted at their smallest vertex s and traversed in the
    // direction whose second vertex is smaller than the last one.
    for s in 0..n {
        let mut path = vec![s];
        let mut edges = Vec::new();
        let mut on = vec![false; n];
        on[s] = true;
        extend(g, s, &mut path, &mut edges, &mut on, &mut out);
    }
    out
}

fn extend(
    g: &WeightedGraph,
    s: usize,
    path: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    on: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let v = *path.last().unwrap();
    for a in g.neighbors(v) {
        let u = a.head;
        if u == s && path.len() >= 3 && path[1] < v {
            let mut c = edges.clone();
            c.push(a.edge);
            out.push(c);
        } else if u > s && !on[u] {
            on[u] = true;
            path.push(u);
            edges.push(a.edge);
            extend(g, s, path, edges, on, out);
            edges.pop();
            path.pop();
            on[u] = false;
        }
    }
}

/// Largest violation `Σ_F x - Σ_{C∖F} x - (|F| - 1)` over all cycles and
/// odd subsets `F`. For a fixed cycle the best `F` takes the edges with
/// `x > 1/2`, fixing parity with the cheapest single change.
pub fn max_cycle_violation(g: &WeightedGraph, x: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for c in all_cycles(g) {
        for mask in 0u64..1 << c.len() {
            if mask.count_ones() % 2 == 0 {
                continue;
            }
            let mut lhs = 0.0;
            for (k, &e) in c.iter().enumerate() {
                lhs += if mask >> k & 1 == 1 { x[e] } else { -x[e] };
            }
            best = best.max(lhs - (mask.count_ones() as f64 - 1.0));
        }
    }
    best
}

/// Whether the vertex cycle traced by `edges` has a chord in `g`.
pub fn has_chord(g: &WeightedGraph, edges: &[usize]) -> bool {
    let on: std::collections::HashSet<usize> = edges.iter().copied().collect();
    let mut verts = std::collections::HashSet::new();
    for &e in edges {
        verts.insert(g.edge(e).u);
        verts.insert(g.edge(e).v);
    }
    g.edges().iter().enumerate().any(|(id, e)| !on.contains(&id) && verts.contains(&e.u) && verts.contains(&e.v))
}
