//! The doubled graph `H` and shortest odd walks through it.
//!
//! Vertex `v` of `G` appears twice in `H`, as `v' = v` and `v'' = v + n`.
//! An edge `e = {v, w}` yields arcs `v'w'` and `v''w''` of weight `x(e)` and
//! crossing arcs `v'w''`, `v''w'` of weight `1 - x(e)`. A `v'`-`v''` path
//! of length below 1 projects to a closed walk with odd `F` that violates a
//! cycle inequality.

use std::collections::VecDeque;

use super::cycles::ClosedWalk;
use super::heap::IndexedHeap;
use crate::graph::WeightedGraph;

/// Arcs at least this close to weight 1 are left out of `H`.
pub const EPS_SKIP: f64 = 1e-6;
/// Arcs up to this weight are contracted when zero contraction is on.
pub const ZERO_ARC: f64 = 1e-12;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxArc {
    pub head: usize,
    pub weight: f64,
    pub edge: usize,
    pub cross: bool,
}

/// Arc between search nodes, remembering the `H` vertices it joins.
#[derive(Debug, Clone, Copy, PartialEq)]
struct NodeArc {
    head: usize,
    weight: f64,
    from: usize,
    to: usize,
    edge: usize,
    cross: bool,
}

/// One step of a path in `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
    pub cross: bool,
}

#[derive(Debug, Clone)]
pub struct AuxGraph {
    n: usize,
    offsets: Vec<usize>,
    arcs: Vec<AuxArc>,
    /// Search node of each `H` vertex; the identity unless zero arcs are
    /// contracted.
    node_of: Vec<usize>,
    twin_node: Vec<usize>,
    node_offsets: Vec<usize>,
    node_arcs: Vec<NodeArc>,
    contracted: bool,
}

pub fn build_aux_graph(g: &WeightedGraph, x: &[f64], contract_zeros: bool) -> AuxGraph {
    let n = g.vertex_count();
    let mut offsets = Vec::with_capacity(2 * n + 1);
    let mut arcs = Vec::new();
    offsets.push(0);
    for a in 0..2 * n {
        let (v, copy) = (a % n, a / n);
        for arc in g.neighbors(v) {
            let xe = x[arc.edge].clamp(0.0, 1.0);
            let same = arc.head + copy * n;
            let other = arc.head + (1 - copy) * n;
            if xe < 1.0 - EPS_SKIP {
                arcs.push(AuxArc { head: same, weight: xe, edge: arc.edge, cross: false });
            }
            if 1.0 - xe < 1.0 - EPS_SKIP {
                arcs.push(AuxArc { head: other, weight: 1.0 - xe, edge: arc.edge, cross: true });
            }
        }
        offsets.push(arcs.len());
    }

    let mut h = AuxGraph {
        n,
        offsets,
        arcs,
        node_of: (0..2 * n).collect(),
        twin_node: (0..2 * n).map(|a| (a + n) % (2 * n)).collect(),
        node_offsets: Vec::new(),
        node_arcs: Vec::new(),
        contracted: contract_zeros,
    };
    if contract_zeros {
        h.contract_zero_arcs();
    }
    h.build_node_arcs();
    h
}

impl AuxGraph {
    pub fn base_vertex_count(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n
    }

    pub fn arcs(&self, a: usize) -> &[AuxArc] {
        &self.arcs[self.offsets[a]..self.offsets[a + 1]]
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn node_count(&self) -> usize {
        self.twin_node.len()
    }

    pub fn twin(&self, a: usize) -> usize {
        (a + self.n) % (2 * self.n)
    }

    fn contract_zero_arcs(&mut self) {
        let m = 2 * self.n;
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for a in 0..m {
            for arc in &self.arcs[self.offsets[a]..self.offsets[a + 1]] {
                if arc.weight <= ZERO_ARC {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, arc.head));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut id_of_root = vec![NONE; m];
        let mut count = 0;
        for a in 0..m {
            let r = find(&mut parent, a);
            if id_of_root[r] == NONE {
                id_of_root[r] = count;
                count += 1;
            }
            self.node_of[a] = id_of_root[r];
        }
        let mut twin_node = vec![NONE; count];
        for a in 0..m {
            twin_node[self.node_of[a]] = self.node_of[self.twin(a)];
        }
        self.twin_node = twin_node;
    }

    fn build_node_arcs(&mut self) {
        let count = self.node_count();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for a in 0..2 * self.n {
            members[self.node_of[a]].push(a);
        }
        self.node_offsets = Vec::with_capacity(count + 1);
        self.node_offsets.push(0);
        for group in &members {
            for &a in group {
                for arc in &self.arcs[self.offsets[a]..self.offsets[a + 1]] {
                    let head = self.node_of[arc.head];
                    if head == self.node_of[a] {
                        continue;
                    }
                    self.node_arcs.push(NodeArc { head, weight: arc.weight, from: a, to: arc.head, edge: arc.edge, cross: arc.cross });
                }
            }
            self.node_offsets.push(self.node_arcs.len());
        }
    }

    fn node_arcs(&self, u: usize) -> &[NodeArc] {
        &self.node_arcs[self.node_offsets[u]..self.node_offsets[u + 1]]
    }
}

/// Labels of one search from `v'`.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub source: usize,
    /// Length of the shortest `v'`-`v''` path when it is below the limit.
    pub distance: Option<f64>,
    /// Whether any node was left unexpanded because of its twin.
    pub twin_pruned: bool,
}

/// Reusable buffers for repeated searches on one [`AuxGraph`].
#[derive(Debug, Clone)]
pub struct Dijkstra {
    dist: Vec<f64>,
    pred: Vec<usize>,
    scanned: Vec<bool>,
    touched: Vec<usize>,
    order: Vec<usize>,
    heap: IndexedHeap,
    bfs_seen: Vec<usize>,
    bfs_stamp: usize,
    bfs_pred: Vec<usize>,
}

impl Dijkstra {
    pub fn new(h: &AuxGraph) -> Self {
        let nodes = h.node_count();
        let m = h.vertex_count();
        Dijkstra {
            dist: vec![f64::INFINITY; nodes],
            pred: vec![NONE; nodes],
            scanned: vec![false; nodes],
            touched: Vec::new(),
            order: Vec::new(),
            heap: IndexedHeap::new(nodes),
            bfs_seen: vec![0; m],
            bfs_stamp: 0,
            bfs_pred: vec![NONE; m],
        }
    }

    fn reset(&mut self) {
        for &u in &self.touched {
            self.dist[u] = f64::INFINITY;
            self.pred[u] = NONE;
            self.scanned[u] = false;
        }
        self.touched.clear();
        self.order.clear();
        self.heap.clear();
    }

    /// Label of a search node after [`Dijkstra::run`], infinite if unreached.
    pub fn distance_to_node(&self, u: usize) -> f64 {
        self.dist[u]
    }

    /// Shortest paths from `v'` in `h`. The search stops once the smallest
    /// open label reaches `limit`, and a node `u` is not expanded when its
    /// twin is already scanned with `d(u) + d(twin u) >= limit`, since any
    /// `v'`-`v''` path through `u` is then at least that long.
    pub fn run(&mut self, h: &AuxGraph, v: usize, limit: f64) -> SearchResult {
        self.reset();
        let s = h.node_of[v];
        let t = h.node_of[v + h.n];
        if s == t {
            return SearchResult { source: v, distance: Some(0.0), twin_pruned: false };
        }
        self.dist[s] = 0.0;
        self.touched.push(s);
        self.heap.push_or_decrease(s, 0.0);
        let mut twin_pruned = false;
        while let Some((u, d)) = self.heap.pop() {
            if d >= limit {
                break;
            }
            self.scanned[u] = true;
            self.order.push(u);
            let tw = h.twin_node[u];
            if u != t && self.scanned[tw] && d + self.dist[tw] >= limit {
                twin_pruned = true;
                continue;
            }
            for (k, arc) in h.node_arcs(u).iter().enumerate() {
                let nd = d + arc.weight;
                if nd < self.dist[arc.head] && nd < limit {
                    if self.dist[arc.head].is_infinite() {
                        self.touched.push(arc.head);
                    }
                    self.dist[arc.head] = nd;
                    self.pred[arc.head] = h.node_offsets[u] + k;
                    self.heap.push_or_decrease(arc.head, nd);
                }
            }
        }
        let distance = self.scanned[t].then_some(self.dist[t]);
        SearchResult { source: v, distance, twin_pruned }
    }

    /// Node-level arcs from the source to `u`, in order.
    fn node_path(&self, h: &AuxGraph, u: usize) -> Vec<NodeArc> {
        let mut arcs = Vec::new();
        let mut cur = u;
        while self.pred[cur] != NONE {
            let a = h.node_arcs[self.pred[cur]];
            arcs.push(a);
            cur = h.node_of[a.from];
        }
        arcs.reverse();
        arcs
    }

    /// Zero-weight steps from `a` to `b` inside one contracted node.
    fn zero_path(&mut self, h: &AuxGraph, a: usize, b: usize) -> Vec<Step> {
        if a == b {
            return Vec::new();
        }
        self.bfs_stamp += 1;
        let stamp = self.bfs_stamp;
        let mut queue = VecDeque::from([a]);
        self.bfs_seen[a] = stamp;
        while let Some(c) = queue.pop_front() {
            if c == b {
                break;
            }
            for (k, arc) in h.arcs(c).iter().enumerate() {
                if arc.weight <= ZERO_ARC && self.bfs_seen[arc.head] != stamp {
                    self.bfs_seen[arc.head] = stamp;
                    self.bfs_pred[arc.head] = h.offsets[c] + k;
                    queue.push_back(arc.head);
                }
            }
        }
        let mut steps = Vec::new();
        let mut cur = b;
        while cur != a {
            let idx = self.bfs_pred[cur];
            let from = h.offsets.partition_point(|&o| o <= idx) - 1;
            let arc = h.arcs[idx];
            steps.push(Step { from, to: cur, edge: arc.edge, cross: arc.cross });
            cur = from;
        }
        steps.reverse();
        steps
    }

    /// Path in `H` from `start` to `end`, following the node-level arcs.
    fn expand(&mut self, h: &AuxGraph, start: usize, node_arcs: &[NodeArc], end: usize) -> Vec<Step> {
        let mut steps = Vec::new();
        let mut cur = start;
        for a in node_arcs {
            if h.contracted {
                steps.extend(self.zero_path(h, cur, a.from));
            }
            steps.push(Step { from: a.from, to: a.to, edge: a.edge, cross: a.cross });
            cur = a.to;
        }
        if h.contracted {
            steps.extend(self.zero_path(h, cur, end));
        }
        steps
    }

    /// The `v'`-`v''` walk found by the last [`Dijkstra::run`] from `v`.
    pub fn main_walk(&mut self, h: &AuxGraph, v: usize) -> ClosedWalk {
        let t = h.node_of[v + h.n];
        let arcs = self.node_path(h, t);
        let steps = self.expand(h, v, &arcs, v + h.n);
        walk_from_steps(h, &steps)
    }

    /// Walks `v' → u → v''` made of the tree path to `u` and the mirrored
    /// tree path to the twin of `u`, for scanned twin pairs off the main
    /// path with `d(u) + d(twin u) < limit`. At most `max_walks`, shortest
    /// first.
    pub fn symmetric_extra_walks(&mut self, h: &AuxGraph, v: usize, limit: f64, max_walks: usize) -> Vec<ClosedWalk> {
        if max_walks == 0 {
            return Vec::new();
        }
        let s = h.node_of[v];
        let t = h.node_of[v + h.n];
        if !self.scanned[t] {
            return Vec::new();
        }
        let mut on_path = vec![s, t];
        on_path.extend(self.node_path(h, t).iter().map(|a| a.head));
        on_path.sort_unstable();
        let mut pairs: Vec<(f64, usize)> = Vec::new();
        for &u in &self.order {
            let tw = h.twin_node[u];
            if u < tw && self.scanned[tw] && on_path.binary_search(&u).is_err() && on_path.binary_search(&tw).is_err() {
                let total = self.dist[u] + self.dist[tw];
                if total < limit {
                    pairs.push((total, u));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pairs.truncate(max_walks);
        let mut walks = Vec::with_capacity(pairs.len());
        for (_, u) in pairs {
            let tw = h.twin_node[u];
            let to_u = self.node_path(h, u);
            let to_tw = self.node_path(h, tw);
            let end_u = to_u.last().map_or(v, |a| a.to);
            let end_tw = to_tw.last().map_or(v, |a| a.to);
            let mut steps = self.expand(h, v, &to_u, end_u);
            let mirrored_start = h.twin(end_tw);
            if h.contracted {
                steps.extend(self.zero_path(h, end_u, mirrored_start));
            }
            // The path to the twin, mirrored into the other copy and reversed,
            // leads from u back to v''.
            let second = self.expand(h, v, &to_tw, end_tw);
            steps.extend(second.iter().rev().map(|st| Step {
                from: h.twin(st.to),
                to: h.twin(st.from),
                edge: st.edge,
                cross: st.cross,
            }));
            walks.push(walk_from_steps(h, &steps));
        }
        walks
    }
}

fn walk_from_steps(h: &AuxGraph, steps: &[Step]) -> ClosedWalk {
    let n = h.n;
    let mut vertices = Vec::with_capacity(steps.len() + 1);
    vertices.push(steps.first().map_or(0, |s| s.from % n));
    for st in steps {
        debug_assert_eq!(*vertices.last().unwrap(), st.from % n);
        vertices.push(st.to % n);
    }
    ClosedWalk {
        vertices,
        edges: steps.iter().map(|s| s.edge).collect(),
        f_mask: steps.iter().map(|s| s.cross).collect(),
    }
}
