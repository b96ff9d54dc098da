//! Separation of cycle inequalities.

mod aux;
mod cycles;
mod heap;

use std::collections::HashSet;

pub use aux::{build_aux_graph, AuxArc, AuxGraph, Dijkstra, SearchResult, Step, EPS_SKIP, ZERO_ARC};
pub use cycles::{chordless_decompose, extract_simple_cycles, ClosedWalk, CyclePrefix, SimpleCycle};
pub use heap::IndexedHeap;

use crate::graph::WeightedGraph;
use crate::lp::{CycleCut, VIOLATION_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationConfig {
    pub min_violation: f64,
    pub contract_zeros: bool,
    /// Triangles examined per round by the cheap pass.
    pub triangle_budget: usize,
    /// Cuts kept per round; `None` means `2 |V|`.
    pub max_cuts_per_round: Option<usize>,
    /// Extra walks taken from the symmetric twin pairs of one search.
    pub max_extra_walks: usize,
    pub threads: usize,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            min_violation: VIOLATION_TOL,
            contract_zeros: false,
            triangle_budget: 50_000,
            max_cuts_per_round: None,
            max_extra_walks: 16,
            threads: 1,
        }
    }
}

/// Violated triangle inequalities, scanning at most `budget` triangles.
pub fn separate_triangles(g: &WeightedGraph, x: &[f64], budget: usize, min_violation: f64) -> Vec<CycleCut> {
    let mut out = Vec::new();
    let mut seen = 0usize;
    'outer: for a in 0..g.vertex_count() {
        for arc_b in g.neighbors(a) {
            let b = arc_b.head;
            if b <= a {
                continue;
            }
            for arc_c in g.neighbors(b) {
                let c = arc_c.head;
                if c <= b {
                    continue;
                }
                let Some(ac) = g.edge_between(a, c) else { continue };
                seen += 1;
                if seen > budget {
                    break 'outer;
                }
                let edges = [arc_b.edge, arc_c.edge, ac];
                let masks: [[bool; 3]; 4] =
                    [[true, true, true], [true, false, false], [false, true, false], [false, false, true]];
                for m in masks {
                    let cut = CycleCut::new(edges.to_vec(), m.to_vec()).expect("odd F");
                    if cut.violation(x) > min_violation {
                        out.push(cut);
                    }
                }
            }
        }
    }
    out
}

/// Cuts from the searches of `sources`, in source order.
fn separate_sources(
    g: &WeightedGraph,
    x: &[f64],
    h: &AuxGraph,
    sources: &[usize],
    cfg: &SeparationConfig,
) -> Vec<CycleCut> {
    let limit = 1.0 - cfg.min_violation;
    let mut dj = Dijkstra::new(h);
    let mut out = Vec::new();
    for &v in sources {
        let res = dj.run(h, v, limit);
        if res.distance.is_none() {
            continue;
        }
        let mut walks = vec![dj.main_walk(h, v)];
        walks.extend(dj.symmetric_extra_walks(h, v, limit, cfg.max_extra_walks));
        for walk in walks {
            for c in extract_simple_cycles(&walk, x, cfg.min_violation) {
                out.extend(chordless_decompose(&c, x, g, cfg.min_violation));
            }
        }
    }
    out
}

fn dedup(cuts: &mut Vec<CycleCut>) {
    let mut seen = HashSet::new();
    cuts.retain(|c| seen.insert(c.key()));
}

/// Exact separation: returns chordless cycle inequalities violated by more
/// than `cfg.min_violation`, and returns none only if no cycle inequality
/// is violated by more than that.
pub fn separate_exact(g: &WeightedGraph, x: &[f64], cfg: &SeparationConfig) -> Vec<CycleCut> {
    let h = build_aux_graph(g, x, cfg.contract_zeros);
    let sources: Vec<usize> = (0..g.vertex_count()).filter(|&v| g.degree(v) >= 2).collect();
    let threads = cfg.threads.max(1).min(sources.len().max(1));
    let mut cuts = if threads == 1 {
        separate_sources(g, x, &h, &sources, cfg)
    } else {
        let chunk = sources.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = sources
                .chunks(chunk)
                .map(|part| {
                    let h = &h;
                    scope.spawn(move || separate_sources(g, x, h, part, cfg))
                })
                .collect();
            handles.into_iter().flat_map(|hd| hd.join().expect("separation worker")).collect()
        })
    };
    cuts.retain(|c| c.violation(x) > cfg.min_violation);
    dedup(&mut cuts);
    cuts
}

/// One separation round: triangles first, the exact search unless the
/// triangles already fill half the round, then the most violated cuts up to
/// the per-round cap.
pub fn separate_round(g: &WeightedGraph, x: &[f64], cfg: &SeparationConfig) -> Vec<CycleCut> {
    let cap = cfg.max_cuts_per_round.unwrap_or(2 * g.vertex_count()).max(1);
    let mut cuts = separate_triangles(g, x, cfg.triangle_budget, cfg.min_violation);
    if cuts.len() < cap.div_ceil(2) {
        cuts.extend(separate_exact(g, x, cfg));
    }
    dedup(&mut cuts);
    let mut scored: Vec<(f64, CycleCut)> = cuts.into_iter().map(|c| (c.violation(x), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(cap);
    scored.into_iter().map(|(_, c)| c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(min_violation: f64) -> SeparationConfig {
        SeparationConfig { min_violation, ..SeparationConfig::default() }
    }

    /// Largest violation over all cycle inequalities, by enumerating every
    /// edge subset that forms a simple cycle and every odd `F` on it.
    fn brute_max_violation(g: &WeightedGraph, x: &[f64]) -> f64 {
        let m = g.edge_count();
        assert!(m <= 16);
        let mut best = f64::NEG_INFINITY;
        for mask in 1u32..(1 << m) {
            let ids: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
            if ids.len() < 3 || !is_simple_cycle(g, &ids) {
                continue;
            }
            for fm in 0u32..(1 << ids.len()) {
                if fm.count_ones() % 2 == 1 {
                    let cut = CycleCut::new(ids.clone(), (0..ids.len()).map(|i| fm >> i & 1 == 1).collect()).unwrap();
                    best = best.max(cut.violation(x));
                }
            }
        }
        best
    }

    fn is_simple_cycle(g: &WeightedGraph, ids: &[usize]) -> bool {
        let mut deg = std::collections::HashMap::new();
        for &e in ids {
            let ed = g.edge(e);
            *deg.entry(ed.u).or_insert(0) += 1;
            *deg.entry(ed.v).or_insert(0) += 1;
        }
        if deg.values().any(|&d| d != 2) || deg.len() != ids.len() {
            return false;
        }
        // Connected?
        let start = g.edge(ids[0]).u;
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &e in ids {
                let ed = g.edge(e);
                if ed.u == v || ed.v == v {
                    let o = ed.other(v);
                    if !seen.contains(&o) {
                        seen.push(o);
                        stack.push(o);
                    }
                }
            }
        }
        seen.len() == deg.len()
    }

    #[test]
    fn five_cycle_point_nine() {
        let g = WeightedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0)));
        let x = vec![0.9; 5];
        let cuts = separate_exact(&g, &x, &cfg(1e-6));
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].f_size(), 5);
        assert!((cuts[0].violation(&x) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn five_cycle_half_is_clean() {
        let g = WeightedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0)));
        assert!(separate_exact(&g, &[0.5; 5], &cfg(1e-6)).is_empty());
    }

    #[test]
    fn triangle_pass_finds_unit_triangle() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let cuts = separate_triangles(&g, &[1.0; 3], 10, 1e-6);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].f_size(), 3);
        assert!(separate_triangles(&g, &[1.0; 3], 0, 1e-6).is_empty());
    }

    #[test]
    fn round_respects_cap() {
        let g = WeightedGraph::from_edges(6, (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b, 1.0))));
        let x = vec![0.95; g.edge_count()];
        let all = separate_round(&g, &x, &SeparationConfig { max_cuts_per_round: Some(1000), ..cfg(1e-6) });
        let capped = separate_round(&g, &x, &SeparationConfig { max_cuts_per_round: Some(3), ..cfg(1e-6) });
        assert!(all.len() > 3);
        assert_eq!(capped.len(), 3);
        let top = all[0].violation(&x);
        assert!(capped.iter().all(|c| (c.violation(&x) - top).abs() < 1e-12));
    }

    #[test]
    fn parallel_matches_sequential() {
        let g = WeightedGraph::from_edges(8, (0..8).flat_map(|a| [(a, (a + 1) % 8, 1.0), (a, (a + 3) % 8, 1.0)]));
        let x: Vec<f64> = (0..g.edge_count()).map(|i| [0.9, 0.1, 0.8, 0.95][i % 4]).collect();
        let one = separate_exact(&g, &x, &cfg(1e-6));
        let three = separate_exact(&g, &x, &SeparationConfig { threads: 3, ..cfg(1e-6) });
        assert_eq!(one, three);
    }

    fn instance() -> impl Strategy<Value = (WeightedGraph, Vec<f64>)> {
        (4usize..8)
            .prop_flat_map(|n| {
                (proptest::collection::vec((0..n, 0..n), 3..14), proptest::collection::vec(0u8..=20, 14)).prop_map(move |(es, xs)| (n, es, xs))
            })
            .prop_map(|(n, es, xs)| {
                let g = WeightedGraph::from_edges(n, es.iter().map(|&(a, b)| (a, b, 1.0)));
                let x: Vec<f64> = (0..g.edge_count()).map(|i| xs[i] as f64 / 20.0).collect();
                (g, x)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn exact_matches_brute_force((g, x) in instance(), contract in any::<bool>()) {
            let tol = 1e-6;
            let c = SeparationConfig { contract_zeros: contract, ..cfg(tol) };
            let cuts = separate_exact(&g, &x, &c);
            let best = brute_max_violation(&g, &x);
            prop_assert_eq!(cuts.is_empty(), !(best > tol), "best {}", best);
            for cut in &cuts {
                prop_assert!(cut.violation(&x) > tol);
                prop_assert!(cut.f_size() % 2 == 1);
                prop_assert!(is_simple_cycle(&g, &cut.edges));
                prop_assert!(has_no_chord(&g, &cut.edges));
            }
        }
    }

    fn has_no_chord(g: &WeightedGraph, edges: &[usize]) -> bool {
        let mut vs: Vec<usize> = edges.iter().flat_map(|&e| [g.edge(e).u, g.edge(e).v]).collect();
        vs.sort_unstable();
        vs.dedup();
        (0..g.edge_count()).all(|e| {
            let ed = g.edge(e);
            edges.contains(&e) || !(vs.contains(&ed.u) && vs.contains(&ed.v))
        })
    }
}
