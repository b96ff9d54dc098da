//! Biconnected components (blocks) and articulation vertices.
//!
//! Max-cut decomposes additively over blocks: two blocks share at most one
//! vertex, and complementing one block's assignment does not change its cut,
//! so optimal block solutions can always be glued together.

use super::WeightedGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Edge ids of the block, sorted.
    pub edges: Vec<usize>,
    /// Vertices touched by the block, sorted.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    /// Sorted articulation vertices.
    pub articulation_points: Vec<usize>,
}

struct Frame {
    v: usize,
    parent_edge: usize,
    next: usize,
}

/// Edge-disjoint biconnected components; every edge lands in exactly one
/// block, bridges forming single-edge blocks. Isolated vertices belong to
/// no block.
pub fn biconnected_components(g: &WeightedGraph) -> BlockDecomposition {
    let n = g.vertex_count();
    const UNSEEN: usize = usize::MAX;
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut is_articulation = vec![false; n];
    let mut clock = 0usize;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();

    for root in 0..n {
        if disc[root] != UNSEEN || g.degree(root) == 0 {
            continue;
        }
        disc[root] = clock;
        low[root] = clock;
        clock += 1;
        let mut root_children = 0usize;
        frames.push(Frame { v: root, parent_edge: usize::MAX, next: 0 });

        while let Some(top) = frames.last_mut() {
            let v = top.v;
            let adj = g.neighbors(v);
            if top.next < adj.len() {
                let arc = adj[top.next];
                top.next += 1;
                if arc.edge == top.parent_edge {
                    continue;
                }
                let w = arc.head;
                if disc[w] == UNSEEN {
                    edge_stack.push(arc.edge);
                    disc[w] = clock;
                    low[w] = clock;
                    clock += 1;
                    frames.push(Frame { v: w, parent_edge: arc.edge, next: 0 });
                } else if disc[w] < disc[v] {
                    edge_stack.push(arc.edge);
                    low[v] = low[v].min(disc[w]);
                }
                continue;
            }

            let done = frames.pop().expect("non-empty");
            let Some(parent) = frames.last() else { break };
            let u = parent.v;
            low[u] = low[u].min(low[done.v]);
            if low[done.v] >= disc[u] {
                let mut edges = Vec::new();
                while let Some(e) = edge_stack.pop() {
                    edges.push(e);
                    if e == done.parent_edge {
                        break;
                    }
                }
                blocks.push(make_block(g, edges));
                if u == root {
                    root_children += 1;
                } else {
                    is_articulation[u] = true;
                }
            }
        }
        if root_children >= 2 {
            is_articulation[root] = true;
        }
    }

    BlockDecomposition {
        blocks,
        articulation_points: (0..n).filter(|&v| is_articulation[v]).collect(),
    }
}

fn make_block(g: &WeightedGraph, mut edges: Vec<usize>) -> Block {
    edges.sort_unstable();
    let mut vertices: Vec<usize> = edges.iter().flat_map(|&e| [g.edge(e).u, g.edge(e).v]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Block { edges, vertices }
}
