//! Compressed-sparse-row weighted graphs.
//!
//! A [`WeightedGraph`] is immutable: every modification (contraction,
//! subgraph extraction) returns a fresh graph. Edges carry dense ids
//! `0..m`, ordered lexicographically by their `(min, max)` endpoints; each
//! edge appears as two arcs, one in each endpoint's adjacency list, and the
//! adjacency lists are sorted by neighbor id.

mod blocks;
mod trace;

pub use blocks::{biconnected_components, Block, BlockDecomposition};
pub use trace::{contract_edge, contract_many, drop_isolated, ContractMode, Merge, ReductionTrace, TraceRecord};

use thiserror::Error;

use crate::io::{is_integral_value, RawMaxCutInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge {0} does not exist")]
    NoSuchEdge(usize),
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("contracting {0} and {1} contradicts an earlier merge")]
    ParityConflict(usize, usize),
}

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// One entry of an adjacency list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub head: usize,
    pub weight: f64,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    arcs: Vec<Arc>,
    edges: Vec<Edge>,
    integral: bool,
}

/// Magnitude below which a non-integral weight produced by cancellation is
/// treated as zero.
const ZERO_WEIGHT: f64 = 1e-12;

impl WeightedGraph {
    /// Builds a graph from edge triples. Parallel edges are summed and
    /// zero-weight edges dropped. Self-loops are ignored.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut list: Vec<Edge> = edges
            .into_iter()
            .filter(|&(a, b, _)| a != b)
            .map(|(a, b, w)| {
                debug_assert!(a < n && b < n);
                Edge { u: a.min(b), v: a.max(b), w }
            })
            .collect();
        list.sort_by_key(|e| (e.u, e.v));
        let mut merged: Vec<Edge> = Vec::with_capacity(list.len());
        for e in list {
            match merged.last_mut() {
                Some(last) if last.u == e.u && last.v == e.v => last.w += e.w,
                _ => merged.push(e),
            }
        }
        let integral = merged.iter().all(|e| is_integral_value(e.w));
        merged.retain(|e| if integral { e.w != 0.0 } else { e.w.abs() > ZERO_WEIGHT });
        Self::from_sorted_edges(n, merged, integral)
    }

    fn from_sorted_edges(n: usize, edges: Vec<Edge>, integral: bool) -> Self {
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut arcs = vec![Arc { head: 0, weight: 0.0, edge: 0 }; 2 * edges.len()];
        // Edges are sorted by (u, v), so scanning them in order fills every
        // adjacency list in increasing neighbor order: lower neighbors of x
        // arrive (as the `v` side) before higher ones (as the `u` side).
        for (id, e) in edges.iter().enumerate() {
            arcs[fill[e.v]] = Arc { head: e.u, weight: e.w, edge: id };
            fill[e.v] += 1;
        }
        for (id, e) in edges.iter().enumerate() {
            arcs[fill[e.u]] = Arc { head: e.v, weight: e.w, edge: id };
            fill[e.u] += 1;
        }
        WeightedGraph { offsets, arcs, edges, integral }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.edges[id].w
    }

    pub fn neighbors(&self, v: usize) -> &[Arc] {
        &self.arcs[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Edge id of `{u, v}` if present; binary search in the adjacency of
    /// the lower-degree endpoint.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        let adj = self.neighbors(a);
        adj.binary_search_by_key(&b, |arc| arc.head).ok().map(|i| adj[i].edge)
    }

    /// All weights are integers; sums and negations keep it so.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// `Σ_{a ∈ δ(v)} |w(a)|`.
    pub fn abs_weight_around(&self, v: usize) -> f64 {
        self.neighbors(v).iter().map(|a| a.weight.abs()).sum()
    }

    /// Sum of positive weights: a trivial upper bound on any cut.
    pub fn positive_weight_sum(&self) -> f64 {
        self.edges.iter().map(|e| e.w.max(0.0)).sum()
    }

    /// The subgraph formed by a set of edge ids, with vertices renumbered
    /// in increasing order of their ids here. Returns the subgraph and the
    /// local→global vertex map.
    pub fn edge_subgraph(&self, edge_ids: &[usize]) -> (WeightedGraph, Vec<usize>) {
        let mut verts: Vec<usize> = edge_ids.iter().flat_map(|&e| [self.edges[e].u, self.edges[e].v]).collect();
        verts.sort_unstable();
        verts.dedup();
        let local = |g: usize| verts.binary_search(&g).expect("vertex of subgraph");
        let list: Vec<(usize, usize, f64)> = edge_ids
            .iter()
            .map(|&e| {
                let ed = self.edges[e];
                (local(ed.u), local(ed.v), ed.w)
            })
            .collect();
        (WeightedGraph::from_edges(verts.len(), list), verts)
    }

    /// Converts back to a raw instance (0-based).
    pub fn to_raw(&self) -> RawMaxCutInstance {
        RawMaxCutInstance::from_edges(self.vertex_count(), self.edges.iter().map(|e| (e.u, e.v, e.w)))
    }
}

/// Builds the CSR graph of a parsed instance, dropping zero-weight edges.
pub fn build_graph(raw: &RawMaxCutInstance) -> WeightedGraph {
    WeightedGraph::from_edges(raw.num_vertices, raw.edges.iter().map(|e| (e.u, e.v, e.w)))
}

/// `Σ_{ {u,v} ∈ E, y(u) ≠ y(v) } w({u,v})`.
pub fn cut_weight(g: &WeightedGraph, sides: &[bool]) -> f64 {
    debug_assert_eq!(sides.len(), g.vertex_count());
    g.edges().iter().filter(|e| sides[e.u] != sides[e.v]).map(|e| e.w).sum()
}

/// A vertex bipartition together with its cut weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSolution {
    pub sides: Vec<bool>,
    pub weight: f64,
}

impl CutSolution {
    pub fn new(g: &WeightedGraph, sides: Vec<bool>) -> Self {
        let weight = cut_weight(g, &sides);
        CutSolution { sides, weight }
    }

    /// All vertices on side 0: the empty cut.
    pub fn empty(g: &WeightedGraph) -> Self {
        CutSolution { sides: vec![false; g.vertex_count()], weight: 0.0 }
    }

    /// Edge incidence vector `x(e) = [y(u) ≠ y(v)]`.
    pub fn incidence(&self, g: &WeightedGraph) -> Vec<bool> {
        g.edges().iter().map(|e| self.sides[e.u] != self.sides[e.v]).collect()
    }
}
