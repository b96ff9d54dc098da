//! Signed edge contraction and the log needed to undo it.
//!
//! Contracting `{u, v}` on the same side merges the two vertices. Contracting
//! on opposite sides first negates the weights around the absorbed endpoint:
//! an edge `{v, z}` then contributes `w - w·[y(u) ≠ y(z)]`, so the merged
//! edge gets `-w` and `w` moves into the constant offset. The lower vertex
//! id always survives.

use super::{GraphError, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractMode {
    /// `x(e) = 0`: endpoints on the same side.
    SameSide,
    /// `x(e) = 1`: endpoints on opposite sides.
    OppositeSide,
}

/// A request to merge two current vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub opposite: bool,
}

/// One reduction step, in original vertex ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceRecord {
    ContractSame { survivor: usize, absorbed: usize },
    ContractOpposite { survivor: usize, absorbed: usize },
    FixVertex { vertex: usize, side: bool },
}

/// Ordered log of reductions applied to an instance.
///
/// For any assignment `y` of the reduced graph,
/// `cut_weight(original, lift(y)) = cut_weight(reduced, y) + offset()`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTrace {
    original_vertices: usize,
    records: Vec<TraceRecord>,
    offset: f64,
    /// Current vertex id -> original vertex id of its representative.
    current: Vec<usize>,
}

impl ReductionTrace {
    pub fn new(vertex_count: usize) -> Self {
        ReductionTrace {
            original_vertices: vertex_count,
            records: Vec::new(),
            offset: 0.0,
            current: (0..vertex_count).collect(),
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Constant to add to a reduced cut weight.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn original_vertex_count(&self) -> usize {
        self.original_vertices
    }

    /// Original id represented by each current vertex.
    pub fn representatives(&self) -> &[usize] {
        &self.current
    }

    /// Lifts a reduced assignment to the original vertex set.
    pub fn lift(&self, reduced: &[bool]) -> Vec<bool> {
        assert_eq!(reduced.len(), self.current.len(), "assignment does not match the reduced graph");
        let mut sides = vec![false; self.original_vertices];
        for (i, &orig) in self.current.iter().enumerate() {
            sides[orig] = reduced[i];
        }
        for rec in self.records.iter().rev() {
            match *rec {
                TraceRecord::ContractSame { survivor, absorbed } => sides[absorbed] = sides[survivor],
                TraceRecord::ContractOpposite { survivor, absorbed } => sides[absorbed] = !sides[survivor],
                TraceRecord::FixVertex { vertex, side } => sides[vertex] = side,
            }
        }
        sides
    }

    /// Restricts an original assignment to the representative vertices.
    pub fn project(&self, original: &[bool]) -> Vec<bool> {
        self.current.iter().map(|&o| original[o]).collect()
    }
}

struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        ParityUnionFind { parent: (0..n).collect(), parity: vec![false; n] }
    }

    /// Root and parity of `x` relative to the root.
    fn find(&mut self, x: usize) -> (usize, bool) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        // Compress from the node nearest the root outward.
        for &node in path.iter().rev() {
            let p = self.parent[node];
            if p != root {
                self.parity[node] ^= self.parity[p];
            }
            self.parent[node] = root;
        }
        (root, self.parity[x] && x != root)
    }
}

/// Contracts a batch of vertex pairs in one CSR rebuild.
///
/// Merges are applied in order; a merge whose endpoints are already joined
/// is skipped when consistent and reported as [`GraphError::ParityConflict`]
/// otherwise. Vertices are renumbered compactly, survivors keeping their
/// relative order.
pub fn contract_many(
    g: &WeightedGraph,
    merges: &[Merge],
    trace: &mut ReductionTrace,
) -> Result<WeightedGraph, GraphError> {
    let n = g.vertex_count();
    assert_eq!(trace.current.len(), n, "trace does not match graph");
    let mut uf = ParityUnionFind::new(n);
    let mut records = Vec::new();
    for m in merges {
        if m.a >= n {
            return Err(GraphError::NoSuchVertex(m.a));
        }
        if m.b >= n {
            return Err(GraphError::NoSuchVertex(m.b));
        }
        let (ra, pa) = uf.find(m.a);
        let (rb, pb) = uf.find(m.b);
        let rel = pa ^ pb ^ m.opposite;
        if ra == rb {
            if rel {
                return Err(GraphError::ParityConflict(m.a, m.b));
            }
            continue;
        }
        let (survivor, absorbed) = (ra.min(rb), ra.max(rb));
        uf.parent[absorbed] = survivor;
        uf.parity[absorbed] = rel;
        let (s, a) = (trace.current[survivor], trace.current[absorbed]);
        records.push(if rel {
            TraceRecord::ContractOpposite { survivor: s, absorbed: a }
        } else {
            TraceRecord::ContractSame { survivor: s, absorbed: a }
        });
    }
    trace.records.extend(records);

    let mut new_id = vec![usize::MAX; n];
    let mut current = Vec::new();
    for v in 0..n {
        if uf.find(v).0 == v {
            new_id[v] = current.len();
            current.push(trace.current[v]);
        }
    }
    let mut offset = 0.0;
    let mut list = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let (ru, pu) = uf.find(e.u);
        let (rv, pv) = uf.find(e.v);
        let flipped = pu ^ pv;
        if ru == rv {
            if flipped {
                offset += e.w;
            }
        } else if flipped {
            offset += e.w;
            list.push((new_id[ru], new_id[rv], -e.w));
        } else {
            list.push((new_id[ru], new_id[rv], e.w));
        }
    }
    trace.offset += offset;
    trace.current = current;
    Ok(WeightedGraph::from_edges(trace.current.len(), list))
}

/// Contracts edge `e`: `SameSide` fixes `x(e) = 0`, `OppositeSide` fixes
/// `x(e) = 1`.
pub fn contract_edge(
    g: &WeightedGraph,
    e: usize,
    mode: ContractMode,
    trace: &mut ReductionTrace,
) -> Result<WeightedGraph, GraphError> {
    if e >= g.edge_count() {
        return Err(GraphError::NoSuchEdge(e));
    }
    let ed = g.edge(e);
    contract_many(g, &[Merge { a: ed.u, b: ed.v, opposite: mode == ContractMode::OppositeSide }], trace)
}

/// Removes vertices without incident edges, fixing them to side 0.
pub fn drop_isolated(g: &WeightedGraph, trace: &mut ReductionTrace) -> WeightedGraph {
    let n = g.vertex_count();
    if (0..n).all(|v| g.degree(v) > 0) {
        return g.clone();
    }
    let mut new_id = vec![usize::MAX; n];
    let mut current = Vec::new();
    for v in 0..n {
        if g.degree(v) == 0 {
            trace.records.push(TraceRecord::FixVertex { vertex: trace.current[v], side: false });
        } else {
            new_id[v] = current.len();
            current.push(trace.current[v]);
        }
    }
    trace.current = current;
    WeightedGraph::from_edges(
        trace.current.len(),
        g.edges().iter().map(|e| (new_id[e.u], new_id[e.v], e.w)),
    )
}
