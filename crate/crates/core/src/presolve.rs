//! Graph reductions applied before branch-and-cut.
//!
//! Every rule proves that some optimal cut satisfies a local property (an
//! edge fixed cut/uncut, or two vertices tied together). Each proof works by
//! flipping a set of vertices inside the rule's support, so a batch of
//! candidates is jointly valid as long as no accepted candidate touches the
//! support of a later one. The loop collects candidates from all rules on
//! the same graph, keeps a non-interfering subset, contracts it in one
//! rebuild and repeats.

use std::collections::HashMap;
use std::time::Instant;

use crate::graph::{contract_many, drop_isolated, Merge, ReductionTrace, WeightedGraph};

/// Default cap on presolve rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 10;
/// Vertices above this degree are not used as triangle enumeration sources.
pub const DEFAULT_TRIANGLE_DEGREE_CAP: usize = 512;
const REL_TOL: f64 = 1e-9;
/// Bound on representative comparisons inside one symmetry hash bucket.
const MAX_CLASSES_PER_BUCKET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DominatingEdge,
    TriangleZero,
    TriangleOne,
    SymmetryMerge,
}

/// An edge fixing `x(edge) = value` proposed by a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFix {
    pub edge: usize,
    pub value: bool,
}

/// Two vertices proven to share a side (`opposite = false`) or to lie on
/// opposite sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexPair {
    pub u: usize,
    pub v: usize,
    pub opposite: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresolveStats {
    pub rounds: usize,
    pub edges_contracted: usize,
    pub vertices_merged: usize,
    pub dominating_edge_hits: usize,
    pub triangle_zero_hits: usize,
    pub triangle_one_hits: usize,
    pub symmetry_hits: usize,
    pub isolated_removed: usize,
    pub vertices_before: usize,
    pub edges_before: usize,
    pub vertices_after: usize,
    pub edges_after: usize,
    pub elapsed_s: f64,
}

impl PresolveStats {
    pub fn vertex_percent_remaining(&self) -> f64 {
        percent(self.vertices_after, self.vertices_before)
    }

    pub fn edge_percent_remaining(&self) -> f64 {
        percent(self.edges_after, self.edges_before)
    }
}

fn percent(after: usize, before: usize) -> f64 {
    if before == 0 {
        100.0
    } else {
        100.0 * after as f64 / before as f64
    }
}

impl std::fmt::Display for PresolveStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "presolve rounds: {}", self.rounds)?;
        writeln!(
            f,
            "vertices: {} -> {} ({:.1}%)",
            self.vertices_before,
            self.vertices_after,
            self.vertex_percent_remaining()
        )?;
        writeln!(f, "edges: {} -> {} ({:.1}%)", self.edges_before, self.edges_after, self.edge_percent_remaining())?;
        writeln!(f, "edges contracted: {}", self.edges_contracted)?;
        writeln!(f, "vertices merged: {}", self.vertices_merged)?;
        writeln!(
            f,
            "rule hits: dominating={} triangle0={} triangle1={} symmetry={}",
            self.dominating_edge_hits, self.triangle_zero_hits, self.triangle_one_hits, self.symmetry_hits
        )?;
        writeln!(f, "isolated vertices removed: {}", self.isolated_removed)?;
        write!(f, "presolve time: {:.3}s", self.elapsed_s)
    }
}

/// Result of [`presolve_loop`].
#[derive(Debug, Clone)]
pub struct Presolved {
    pub graph: WeightedGraph,
    pub trace: ReductionTrace,
    pub stats: PresolveStats,
}

/// `lhs ≥ rhs`, exact for integral graphs and otherwise demanding a relative
/// margin so that rounding never admits a reduction.
fn at_least(g: &WeightedGraph, lhs: f64, rhs: f64) -> bool {
    if g.is_integral() {
        lhs >= rhs
    } else {
        lhs - rhs >= REL_TOL * lhs.abs().max(rhs.abs())
    }
}

fn abs_sums(g: &WeightedGraph) -> Vec<f64> {
    (0..g.vertex_count()).map(|v| g.abs_weight_around(v)).collect()
}

/// Edges dominating the cut of one of their endpoints.
pub fn rule_dominating_edge(g: &WeightedGraph) -> Vec<EdgeFix> {
    let s = abs_sums(g);
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let w = e.w.abs();
            at_least(g, w, s[e.u] - w) || at_least(g, w, s[e.v] - w)
        })
        .map(|(id, e)| EdgeFix { edge: id, value: e.w > 0.0 })
        .collect()
}

/// A triangle `(a, b, c)` with its edge ids and weights.
#[derive(Debug, Clone, Copy)]
struct Triangle {
    v: [usize; 3],
    /// `e[i]` is the edge opposite to `v[i]`.
    e: [usize; 3],
}

/// Triangles `a < b < c`, enumerated from edges whose endpoints both have
/// degree at most `degree_cap`.
fn triangles(g: &WeightedGraph, degree_cap: usize) -> Vec<Triangle> {
    let mut out = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        if g.degree(e.u) > degree_cap || g.degree(e.v) > degree_cap {
            continue;
        }
        let (nu, nv) = (g.neighbors(e.u), g.neighbors(e.v));
        let (mut i, mut j) = (nu.partition_point(|a| a.head <= e.v), nv.partition_point(|a| a.head <= e.v));
        while i < nu.len() && j < nv.len() {
            match nu[i].head.cmp(&nv[j].head) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(Triangle { v: [e.u, e.v, nu[i].head], e: [nv[j].edge, nu[i].edge, id] });
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    out
}

/// Triangle viewed with a chosen labelling `v1, v2, v3`.
struct Labelled<'a> {
    g: &'a WeightedGraph,
    s: &'a [f64],
    v: [usize; 3],
    /// Weights of `v1v2`, `v1v3`, `v2v3`.
    w12: f64,
    w13: f64,
    w23: f64,
}

impl Labelled<'_> {
    fn new<'a>(g: &'a WeightedGraph, s: &'a [f64], t: &Triangle, order: [usize; 3]) -> Labelled<'a> {
        let pos = |x: usize| t.v.iter().position(|&y| y == x).expect("triangle vertex");
        let [a, b, c] = order;
        // The edge between two labelled vertices is opposite to the third.
        let w = |third: usize| g.weight(t.e[pos(third)]);
        Labelled { g, s, v: order, w12: w(c), w13: w(b), w23: w(a) }
    }

    /// `Σ |w|` over the edges leaving `{vi}` and over those leaving the other
    /// two triangle vertices, both without the two triangle edges at `vi`.
    /// The second value is the external weight of the pair set, whose cut
    /// contains the same two triangle edges.
    fn separator_weights(&self, i: usize) -> [f64; 2] {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let wij = self.w_between(i, j).abs();
        let wik = self.w_between(i, k).abs();
        let wjk = self.w_between(j, k).abs();
        [
            self.s[self.v[i]] - wij - wik,
            self.s[self.v[j]] + self.s[self.v[k]] - wij - wik - 2.0 * wjk,
        ]
    }

    fn w_between(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.w12,
            (0, 2) => self.w13,
            _ => self.w23,
        }
    }

    /// `lhs ≥ rhs` for one of the two separating sets of `vi`, where
    /// `extra` is added to both external sums.
    fn holds(&self, lhs: f64, i: usize, extra: f64) -> bool {
        self.separator_weights(i).iter().any(|&rhs| at_least(self.g, lhs, rhs + extra))
    }
}

/// Triangle edges proven uncut.
///
/// With `v1v2` the candidate, a cut containing it separates either `v1` or
/// `v2` from the other two triangle vertices. Flipping a set that separates
/// the other endpoint then uncuts `v1v2` and cuts the third triangle edge,
/// which pays off when `w13 - w12` (resp. `w23 - w12`) covers every other
/// edge leaving the flipped set.
pub fn rule_triangle_zero(g: &WeightedGraph) -> Vec<EdgeFix> {
    rule_triangle_zero_capped(g, DEFAULT_TRIANGLE_DEGREE_CAP)
}

fn rule_triangle_zero_capped(g: &WeightedGraph, cap: usize) -> Vec<EdgeFix> {
    let s = abs_sums(g);
    let mut out = Vec::new();
    for t in triangles(g, cap) {
        let [a, b, c] = t.v;
        for (order, edge) in [([a, b, c], t.e[2]), ([a, c, b], t.e[1]), ([b, c, a], t.e[0])] {
            let l = Labelled::new(g, &s, &t, order);
            if l.holds(l.w13 - l.w12, 0, 0.0) && l.holds(l.w23 - l.w12, 1, 0.0) {
                out.push(EdgeFix { edge, value: false });
            }
        }
    }
    out
}

/// Triangle edges proven cut, for triangles with two positive edges at `v1`
/// and a negative edge `v2v3`.
///
/// Both conditions are checked as stated for this test: the first against
/// the edges leaving a separator of `v1` other than `v1v2, v1v3`, the second
/// against the edges leaving a separator of `v2` other than `v1v2, v1v3`.
/// The second sum therefore still contains `|w23|`.
pub fn rule_triangle_one(g: &WeightedGraph) -> Vec<EdgeFix> {
    rule_triangle_one_capped(g, DEFAULT_TRIANGLE_DEGREE_CAP)
}

fn rule_triangle_one_capped(g: &WeightedGraph, cap: usize) -> Vec<EdgeFix> {
    let s = abs_sums(g);
    let mut out = Vec::new();
    for t in triangles(g, cap) {
        for apex in 0..3 {
            let (o1, o2) = ((apex + 1) % 3, (apex + 2) % 3);
            for (v2, v3) in [(o1, o2), (o2, o1)] {
                let l = Labelled::new(g, &s, &t, [t.v[apex], t.v[v2], t.v[v3]]);
                if !(l.w12 > 0.0 && l.w13 > 0.0 && l.w23 < 0.0) {
                    continue;
                }
                if l.holds(l.w12 + l.w13, 0, 0.0) && l.holds(l.w12 - l.w23, 1, l.w23.abs()) {
                    out.push(EdgeFix { edge: t.e[v3], value: true });
                }
            }
        }
    }
    out
}

/// Pairs with equal punctured neighbourhoods and proportional weights.
pub fn rule_symmetry_merge(g: &WeightedGraph) -> Vec<VertexPair> {
    let n = g.vertex_count();
    let id_hash: Vec<u64> = (0..n).map(|v| mix(v as u64)).collect();
    let nbr_hash: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |h, a| h.wrapping_add(id_hash[a.head])))
        .collect();
    let mut out = Vec::new();

    // Adjacent pairs: compare N(u) - v with N(v) - u through the additive hash.
    for e in g.edges() {
        let (u, v) = (e.u, e.v);
        if g.degree(u) != g.degree(v) || g.degree(u) < 2 {
            continue;
        }
        if nbr_hash[u].wrapping_sub(id_hash[v]) != nbr_hash[v].wrapping_sub(id_hash[u]) {
            continue;
        }
        if let Some(alpha_positive) = proportional(g, u, v) {
            // Tying u and v must not lose the weight of {u, v}.
            if (alpha_positive && e.w < 0.0) || (!alpha_positive && e.w > 0.0) {
                out.push(VertexPair { u, v, opposite: !alpha_positive });
            }
        }
    }

    // Non-adjacent pairs: bucket by neighbourhood hash and degree.
    let mut buckets: HashMap<(u64, usize), Vec<usize>> = HashMap::new();
    for v in 0..n {
        if g.degree(v) > 0 {
            buckets.entry((nbr_hash[v], g.degree(v))).or_default().push(v);
        }
    }
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let members = &buckets[&key];
        if members.len() < 2 {
            continue;
        }
        let mut leaders: Vec<usize> = Vec::new();
        for &v in members {
            if leaders.iter().any(|&u| g.edge_between(u, v).is_some()) {
                continue;
            }
            let found = leaders.iter().find_map(|&u| proportional(g, u, v).map(|pos| (u, pos)));
            match found {
                Some((u, pos)) => out.push(VertexPair { u, v, opposite: !pos }),
                None if leaders.len() < MAX_CLASSES_PER_BUCKET => leaders.push(v),
                None => {}
            }
        }
    }
    out
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Checks `N(u) - v = N(v) - u` and `w(u, z) = α w(v, z)` for one `α`;
/// returns the sign of `α`.
fn proportional(g: &WeightedGraph, u: usize, v: usize) -> Option<bool> {
    let nu: Vec<_> = g.neighbors(u).iter().filter(|a| a.head != v).collect();
    let nv: Vec<_> = g.neighbors(v).iter().filter(|a| a.head != u).collect();
    if nu.len() != nv.len() || nu.is_empty() {
        return None;
    }
    let (pu, pv) = (nu[0].weight, nv[0].weight);
    for (a, b) in nu.iter().zip(&nv) {
        if a.head != b.head {
            return None;
        }
        // a.w / b.w == pu / pv, cross-multiplied.
        let (l, r) = (a.weight * pv, b.weight * pu);
        let ok = if g.is_integral() { l == r } else { (l - r).abs() <= REL_TOL * l.abs().max(r.abs()) };
        if !ok {
            return None;
        }
    }
    Some((pu > 0.0) == (pv > 0.0))
}

/// A candidate contraction and the vertices its proof may flip.
struct Candidate {
    rule: Rule,
    merge: Merge,
    support: Vec<usize>,
}

fn candidates(g: &WeightedGraph, cap: usize) -> Vec<Candidate> {
    let mut out = Vec::new();
    let edge_candidate = |rule: Rule, f: EdgeFix, support: Vec<usize>| {
        let e = g.edge(f.edge);
        Candidate { rule, merge: Merge { a: e.u, b: e.v, opposite: f.value }, support }
    };
    for f in rule_dominating_edge(g) {
        let e = g.edge(f.edge);
        out.push(edge_candidate(Rule::DominatingEdge, f, vec![e.u, e.v]));
    }
    let third = |f: &EdgeFix| {
        let e = g.edge(f.edge);
        let mut s = vec![e.u, e.v];
        // Any common neighbour may be the third triangle vertex; the whole
        // closed neighbourhood of the edge covers every separator used.
        s.extend(g.neighbors(e.u).iter().map(|a| a.head));
        s.extend(g.neighbors(e.v).iter().map(|a| a.head));
        s
    };
    for f in rule_triangle_zero_capped(g, cap) {
        let s = third(&f);
        out.push(edge_candidate(Rule::TriangleZero, f, s));
    }
    for f in rule_triangle_one_capped(g, cap) {
        let s = third(&f);
        out.push(edge_candidate(Rule::TriangleOne, f, s));
    }
    for p in rule_symmetry_merge(g) {
        out.push(Candidate {
            rule: Rule::SymmetryMerge,
            merge: Merge { a: p.u, b: p.v, opposite: p.opposite },
            support: vec![p.u, p.v],
        });
    }
    out
}

/// Runs the reduction rules until a round contracts nothing or `max_rounds`
/// rounds have run, then drops isolated vertices.
pub fn presolve_loop(g: &WeightedGraph, max_rounds: usize) -> Presolved {
    presolve_with_cap(g, max_rounds, DEFAULT_TRIANGLE_DEGREE_CAP)
}

pub fn presolve_with_cap(g: &WeightedGraph, max_rounds: usize, triangle_degree_cap: usize) -> Presolved {
    assert!(max_rounds >= 1, "max_rounds must be positive");
    let start = Instant::now();
    let mut stats = PresolveStats {
        vertices_before: g.vertex_count(),
        edges_before: g.edge_count(),
        ..Default::default()
    };
    let mut trace = ReductionTrace::new(g.vertex_count());
    let mut cur = g.clone();
    while stats.rounds < max_rounds {
        stats.rounds += 1;
        let mut touched = vec![false; cur.vertex_count()];
        let mut merges = Vec::new();
        for c in candidates(&cur, triangle_degree_cap) {
            if c.support.iter().any(|&v| touched[v]) {
                continue;
            }
            touched[c.merge.a] = true;
            touched[c.merge.b] = true;
            match c.rule {
                Rule::DominatingEdge => stats.dominating_edge_hits += 1,
                Rule::TriangleZero => stats.triangle_zero_hits += 1,
                Rule::TriangleOne => stats.triangle_one_hits += 1,
                Rule::SymmetryMerge => stats.symmetry_hits += 1,
            }
            if c.rule == Rule::SymmetryMerge {
                stats.vertices_merged += 1;
            } else {
                stats.edges_contracted += 1;
            }
            merges.push(c.merge);
        }
        if merges.is_empty() {
            break;
        }
        log::debug!("presolve round {}: {} contractions", stats.rounds, merges.len());
        cur = contract_many(&cur, &merges, &mut trace).expect("accepted merges are vertex-disjoint");
    }
    let before = cur.vertex_count();
    cur = drop_isolated(&cur, &mut trace);
    stats.isolated_removed = before - cur.vertex_count();
    stats.vertices_after = cur.vertex_count();
    stats.edges_after = cur.edge_count();
    stats.elapsed_s = start.elapsed().as_secs_f64();
    Presolved { graph: cur, trace, stats }
}
