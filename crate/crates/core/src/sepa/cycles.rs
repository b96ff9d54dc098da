//! Closed walks, simple cycles and their chordless refinement.

use std::collections::HashMap;

use crate::graph::WeightedGraph;
use crate::lp::CycleCut;

/// A closed walk in `G`: `vertices[0] == vertices[len]`, edge `i` joins
/// `vertices[i]` and `vertices[i + 1]`, `f_mask[i]` marks a copy switch.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedWalk {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub f_mask: Vec<bool>,
}

impl ClosedWalk {
    /// `Σ_F (1 - x) + Σ_{C∖F} x`.
    pub fn length(&self, x: &[f64]) -> f64 {
        self.edges.iter().zip(&self.f_mask).map(|(&e, &f)| if f { 1.0 - x[e] } else { x[e] }).sum()
    }
}

/// A simple cycle `vertices[0] … vertices[k-1]`; edge `i` joins
/// `vertices[i]` and `vertices[(i + 1) % k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleCycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub f_mask: Vec<bool>,
}

impl SimpleCycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn length(&self, x: &[f64]) -> f64 {
        self.edges.iter().zip(&self.f_mask).map(|(&e, &f)| if f { 1.0 - x[e] } else { x[e] }).sum()
    }

    pub fn f_is_odd(&self) -> bool {
        self.f_mask.iter().filter(|&&b| b).count() % 2 == 1
    }

    pub fn to_cut(&self) -> CycleCut {
        CycleCut::new(self.edges.clone(), self.f_mask.clone()).expect("odd F")
    }

    /// True if no edge of `g` joins two non-consecutive cycle vertices.
    pub fn is_chordless(&self, g: &WeightedGraph) -> bool {
        let k = self.len();
        let pos: HashMap<usize, usize> = self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for (i, &v) in self.vertices.iter().enumerate() {
            for a in g.neighbors(v) {
                if let Some(&j) = pos.get(&a.head) {
                    let gap = i.abs_diff(j);
                    if gap != 1 && gap != k - 1 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Splits a closed walk into simple cycles (the cycles partition the walk's
/// edge multiset) and keeps those with odd `F`, at least three edges and
/// length below `1 - min_violation`.
pub fn extract_simple_cycles(walk: &ClosedWalk, x: &[f64], min_violation: f64) -> Vec<SimpleCycle> {
    let mut out = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    let mut stack_v = vec![walk.vertices[0]];
    let mut stack_e: Vec<(usize, bool)> = Vec::new();
    pos.insert(walk.vertices[0], 0);
    for i in 0..walk.edges.len() {
        let next = walk.vertices[i + 1];
        stack_e.push((walk.edges[i], walk.f_mask[i]));
        if let Some(&p) = pos.get(&next) {
            let cyc_v: Vec<usize> = stack_v[p..].to_vec();
            let cyc_e: Vec<(usize, bool)> = stack_e[p..].to_vec();
            for v in &stack_v[p + 1..] {
                pos.remove(v);
            }
            stack_v.truncate(p + 1);
            stack_e.truncate(p);
            let c = SimpleCycle {
                vertices: cyc_v,
                edges: cyc_e.iter().map(|e| e.0).collect(),
                f_mask: cyc_e.iter().map(|e| e.1).collect(),
            };
            if c.len() >= 3 && c.f_is_odd() && c.length(x) < 1.0 - min_violation {
                out.push(c);
            }
        } else {
            pos.insert(next, stack_v.len());
            stack_v.push(next);
        }
    }
    out
}

/// Prefix data of a cycle: `f[i]` counts `F` among edges `0..i`, `q[i]` is
/// the walk length of those edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePrefix {
    pub f: Vec<usize>,
    pub q: Vec<f64>,
}

impl CyclePrefix {
    pub fn new(c: &SimpleCycle, x: &[f64]) -> Self {
        let k = c.len();
        let mut f = vec![0; k + 1];
        let mut q = vec![0.0; k + 1];
        for i in 0..k {
            let in_f = c.f_mask[i];
            f[i + 1] = f[i] + in_f as usize;
            q[i + 1] = q[i] + if in_f { 1.0 - x[c.edges[i]] } else { x[c.edges[i]] };
        }
        CyclePrefix { f, q }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    size: usize,
    /// Cycle positions `j < i` joined by the chord.
    j: usize,
    i: usize,
    chord: usize,
    /// The sub-cycle through positions `j..=i` rather than its complement.
    inner: bool,
    chord_in_f: bool,
}

/// Refines a violated simple cycle into violated cycles without chords.
///
/// Every chord splits the cycle in two; both sides are evaluated in O(1)
/// from the prefix data and the sides violated by more than
/// `min_violation` are collected. Those are scanned by increasing size and
/// accepted while both chord endpoints are still unmarked, after which the
/// positions strictly inside the accepted side are marked. Accepted sides
/// are refined recursively. Without any violated side the cycle is returned
/// as it is.
pub fn chordless_decompose(c: &SimpleCycle, x: &[f64], g: &WeightedGraph, min_violation: f64) -> Vec<CycleCut> {
    let mut out = Vec::new();
    decompose_into(c, x, g, min_violation, &mut out);
    let mut seen = std::collections::HashSet::new();
    out.retain(|cut| seen.insert(cut.key()));
    out
}

fn decompose_into(c: &SimpleCycle, x: &[f64], g: &WeightedGraph, min_violation: f64, out: &mut Vec<CycleCut>) {
    let k = c.len();
    let limit = 1.0 - min_violation;
    let pre = CyclePrefix::new(c, x);
    let (f_total, q_total) = (pre.f[k], pre.q[k]);
    let pos: HashMap<usize, usize> = c.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut r = Vec::new();
    for (i, &v) in c.vertices.iter().enumerate() {
        for a in g.neighbors(v) {
            let Some(&j) = pos.get(&a.head) else { continue };
            if j >= i || i - j == 1 || (j == 0 && i == k - 1) {
                continue;
            }
            let xc = x[a.edge];
            let (f_in, q_in) = (pre.f[i] - pre.f[j], pre.q[i] - pre.q[j]);
            // The chord closes each side with the parity it needs.
            let inner_chord_f = f_in % 2 == 0;
            let inner_len = q_in + if inner_chord_f { 1.0 - xc } else { xc };
            if inner_len < limit {
                r.push(Candidate { size: i - j + 1, j, i, chord: a.edge, inner: true, chord_in_f: inner_chord_f });
            }
            let (f_out, q_out) = (f_total - f_in, q_total - q_in);
            let outer_chord_f = f_out % 2 == 0;
            let outer_len = q_out + if outer_chord_f { 1.0 - xc } else { xc };
            if outer_len < limit {
                r.push(Candidate { size: k - (i - j) + 1, j, i, chord: a.edge, inner: false, chord_in_f: outer_chord_f });
            }
        }
    }
    if r.is_empty() {
        out.push(c.to_cut());
        return;
    }
    r.sort_by_key(|cand| (cand.size, cand.j, cand.i, !cand.inner));
    let mut marked = vec![false; k];
    for cand in r {
        let (j, i) = (cand.j, cand.i);
        if marked[i] || marked[j] {
            continue;
        }
        let sub = if cand.inner {
            marked[j + 1..i].iter_mut().for_each(|m| *m = true);
            let mut edges = c.edges[j..i].to_vec();
            let mut f_mask = c.f_mask[j..i].to_vec();
            edges.push(cand.chord);
            f_mask.push(cand.chord_in_f);
            SimpleCycle { vertices: c.vertices[j..=i].to_vec(), edges, f_mask }
        } else {
            marked[i + 1..].iter_mut().for_each(|m| *m = true);
            marked[..j].iter_mut().for_each(|m| *m = true);
            let mut vertices = c.vertices[i..].to_vec();
            vertices.extend_from_slice(&c.vertices[..=j]);
            let mut edges = c.edges[i..].to_vec();
            edges.extend_from_slice(&c.edges[..j]);
            let mut f_mask = c.f_mask[i..].to_vec();
            f_mask.extend_from_slice(&c.f_mask[..j]);
            edges.push(cand.chord);
            f_mask.push(cand.chord_in_f);
            SimpleCycle { vertices, edges, f_mask }
        };
        debug_assert!(sub.f_is_odd());
        decompose_into(&sub, x, g, min_violation, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cycle 0-1-2-3 with chord {0, 2}.
    fn four_cycle_with_chord() -> (WeightedGraph, SimpleCycle, Vec<f64>) {
        let g = WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0), (0, 2, 1.0)]);
        let e = |a, b| g.edge_between(a, b).unwrap();
        let mut x = vec![0.0; g.edge_count()];
        x[e(0, 1)] = 0.95;
        x[e(1, 2)] = 0.95;
        x[e(2, 3)] = 0.95;
        x[e(0, 3)] = 0.05;
        x[e(0, 2)] = 0.05;
        let c = SimpleCycle {
            vertices: vec![0, 1, 2, 3],
            edges: vec![e(0, 1), e(1, 2), e(2, 3), e(0, 3)],
            f_mask: vec![true, true, true, false],
        };
        (g, c, x)
    }

    #[test]
    fn four_cycle_chord_yields_triangle() {
        let (g, c, x) = four_cycle_with_chord();
        assert!((c.length(&x) - 0.2).abs() < 1e-12);
        let cuts = chordless_decompose(&c, &x, &g, 1e-6);
        assert_eq!(cuts.len(), 1);
        let e = |a, b| g.edge_between(a, b).unwrap();
        let expected = CycleCut::new(vec![e(2, 3), e(0, 3), e(0, 2)], vec![true, false, false]).unwrap();
        assert_eq!(cuts[0].key(), expected.key());
        assert!((cuts[0].walk_length(&x) - 0.15).abs() < 1e-12);
    }

    #[test]
    fn chordless_cycle_returned_unchanged() {
        let g = WeightedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0)));
        let c = SimpleCycle { vertices: (0..5).collect(), edges: vec![0, 2, 3, 4, 1], f_mask: vec![true; 5] };
        // Edge ids follow (u, v) order: {0,1}=0 {0,4}=1 {1,2}=2 {2,3}=3 {3,4}=4.
        assert_eq!(g.edge_between(0, 4), Some(1));
        let x = vec![0.9; 5];
        let cuts = chordless_decompose(&c, &x, &g, 1e-6);
        assert_eq!(cuts, vec![c.to_cut()]);
        assert!((cuts[0].violation(&x) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_disjoint_chords_give_two_triangles() {
        // 6-cycle 0..5 with chords {0, 2} and {3, 5}.
        let mut es: Vec<(usize, usize, f64)> = (0..6).map(|i| (i, (i + 1) % 6, 1.0)).collect();
        es.push((0, 2, 1.0));
        es.push((3, 5, 1.0));
        let g = WeightedGraph::from_edges(6, es);
        let e = |a, b| g.edge_between(a, b).unwrap();
        let ring: Vec<usize> = (0..6).map(|i| e(i, (i + 1) % 6)).collect();
        let mut x = vec![0.0; g.edge_count()];
        // Ring edges at 0.95 in F except {5,0} at 0.05; chords at 0.95.
        for &(a, b) in &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (3, 5)] {
            x[e(a, b)] = 0.95;
        }
        x[e(0, 5)] = 0.05;
        let c = SimpleCycle { vertices: (0..6).collect(), edges: ring, f_mask: vec![true, true, true, true, true, false] };
        assert!(c.f_is_odd());
        assert!(c.length(&x) < 1.0);
        let cuts = chordless_decompose(&c, &x, &g, 1e-6);
        let mut vertex_sets: Vec<Vec<usize>> = cuts
            .iter()
            .map(|cut| {
                let mut vs: Vec<usize> = cut.edges.iter().flat_map(|&id| [g.edge(id).u, g.edge(id).v]).collect();
                vs.sort_unstable();
                vs.dedup();
                vs
            })
            .collect();
        vertex_sets.sort();
        assert!(vertex_sets.contains(&vec![0, 1, 2]));
        assert!(vertex_sets.contains(&vec![3, 4, 5]));
        for cut in &cuts {
            assert!(cut.violation(&x) > 1e-6);
        }
    }

    #[test]
    fn figure_eight_splits_in_two() {
        // Triangles 0-1-2 and 0-3-4 sharing vertex 0, walked as one loop.
        let g = WeightedGraph::from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (0, 3, 1.0), (3, 4, 1.0), (0, 4, 1.0)]);
        let e = |a, b| g.edge_between(a, b).unwrap();
        let walk = ClosedWalk {
            vertices: vec![0, 1, 2, 0, 3, 4, 0],
            edges: vec![e(0, 1), e(1, 2), e(0, 2), e(0, 3), e(3, 4), e(0, 4)],
            f_mask: vec![true, true, true, false, false, false],
        };
        let x = vec![0.9, 0.9, 0.9, 0.0, 0.0, 0.0];
        let mut x_by_edge = vec![0.0; g.edge_count()];
        for (i, &id) in walk.edges.iter().enumerate() {
            x_by_edge[id] = x[i];
        }
        // Keep even-F cycles too, to see the split itself.
        let all = extract_simple_cycles(&walk, &x_by_edge, -10.0);
        assert_eq!(all.len(), 1, "the even-F triangle is dropped");
        assert_eq!(all[0].vertices, vec![0, 1, 2]);
        let walk_len = walk.length(&x_by_edge);
        assert!((walk_len - 0.3).abs() < 1e-12);
    }

    #[test]
    fn simple_walk_returned_unchanged() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let e = |a, b| g.edge_between(a, b).unwrap();
        let walk = ClosedWalk { vertices: vec![0, 1, 2, 0], edges: vec![e(0, 1), e(1, 2), e(0, 2)], f_mask: vec![true; 3] };
        let x = vec![0.9; 3];
        let cycles = extract_simple_cycles(&walk, &x, 1e-6);
        assert_eq!(cycles, vec![SimpleCycle { vertices: vec![0, 1, 2], edges: walk.edges.clone(), f_mask: vec![true; 3] }]);
    }

    #[test]
    fn back_and_forth_edge_is_dropped() {
        // 0 -> 1 -> 0 via the same edge, then the triangle 0-2-3.
        let g = WeightedGraph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]);
        let e = |a, b| g.edge_between(a, b).unwrap();
        let walk = ClosedWalk {
            vertices: vec![0, 1, 0, 2, 3, 0],
            edges: vec![e(0, 1), e(0, 1), e(0, 2), e(2, 3), e(0, 3)],
            f_mask: vec![false, false, true, false, false],
        };
        let x = vec![0.0, 0.8, 0.1, 0.05];
        let cycles = extract_simple_cycles(&walk, &x, 1e-6);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 2, 3]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        /// A random violated simple cycle on a ring with random chords.
        fn violated_cycle(seed: u64) -> Option<(WeightedGraph, SimpleCycle, Vec<f64>)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.gen_range(4..=12);
            let n = k + rng.gen_range(0..3);
            let mut es: Vec<(usize, usize, f64)> = (0..k).map(|i| (i, (i + 1) % k, 1.0)).collect();
            for _ in 0..rng.gen_range(0..2 * k) {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                es.push((a, b, 1.0));
            }
            let g = WeightedGraph::from_edges(n, es);
            let edges: Vec<usize> = (0..k).map(|i| g.edge_between(i, (i + 1) % k).unwrap()).collect();
            let mut f_mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
            if f_mask.iter().filter(|&&b| b).count() % 2 == 0 {
                f_mask[0] = !f_mask[0];
            }
            let mut x: Vec<f64> = (0..g.edge_count()).map(|_| rng.gen::<f64>()).collect();
            // Push the ring toward violation: F edges near 1, others near 0.
            for (i, &id) in edges.iter().enumerate() {
                let s = rng.gen::<f64>() * 0.15;
                x[id] = if f_mask[i] { 1.0 - s } else { s };
            }
            let c = SimpleCycle { vertices: (0..k).collect(), edges, f_mask };
            (c.length(&x) < 1.0 - 1e-9).then_some((g, c, x))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]
            #[test]
            fn decomposition_is_violated_and_chordless(seed in any::<u64>()) {
                if let Some((g, c, x)) = violated_cycle(seed) {
                    let cuts = chordless_decompose(&c, &x, &g, 1e-9);
                    prop_assert!(!cuts.is_empty());
                    for cut in cuts {
                        prop_assert!(cut.violation(&x) > 0.0);
                        prop_assert!(cut.f_size() % 2 == 1);
                    }
                }
            }

            #[test]
            fn chord_split_is_additive(seed in any::<u64>()) {
                if let Some((g, c, x)) = violated_cycle(seed) {
                    let k = c.len();
                    let pre = CyclePrefix::new(&c, &x);
                    for i in 2..k {
                        for j in 0..i - 1 {
                            if j == 0 && i == k - 1 {
                                continue;
                            }
                            let Some(ch) = g.edge_between(c.vertices[i], c.vertices[j]) else { continue };
                            let xc = x[ch];
                            let f_in = pre.f[i] - pre.f[j];
                            let q_in = pre.q[i] - pre.q[j];
                            let inner = q_in + if f_in % 2 == 0 { 1.0 - xc } else { xc };
                            let outer = (pre.q[k] - q_in) + if (pre.f[k] - f_in) % 2 == 0 { 1.0 - xc } else { xc };
                            // Violations 1 - length add up exactly.
                            prop_assert!(((1.0 - inner) + (1.0 - outer) - (1.0 - c.length(&x))).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }
}
