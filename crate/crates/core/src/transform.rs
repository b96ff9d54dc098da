//! Reductions between QUBO and max-cut.
//!
//! With `S = (Q + Qᵀ)/2`, `xᵀQx = Σ_i S_ii x_i + Σ_{i<j} 2 S_ij x_i x_j`.
//! Put an extra root vertex on side 0 and vertex `i` on side `x_i`; then
//! `x_i = [root and i cut]` and `x_i x_j = (x_i + x_j - [i and j cut]) / 2`,
//! which turns the quadratic form into a signed cut weight.

use crate::io::{RawMaxCutInstance, RawQuboInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    /// `qubo(x) = offset - cut(y(x))`.
    QuboToMaxcut,
    /// `cut(y) = offset - qubo(x(y))`.
    MaxcutToQubo,
}

/// Relates objective values of the two sides of a transformation.
///
/// Both directions negate the objective: the QUBO minimum equals
/// `constant_offset` minus the maximum cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCertificate {
    pub direction: TransformDirection,
    pub constant_offset: f64,
    /// The vertex pinned to side 0.
    pub root_vertex: usize,
}

impl TransformCertificate {
    /// Maps a value of the transformed problem to the original objective.
    pub fn to_original(&self, transformed_value: f64) -> f64 {
        self.constant_offset - transformed_value
    }

    /// For `QuboToMaxcut`: the QUBO vector encoded by a cut. The root's side
    /// is side 0, so the whole assignment is complemented if needed.
    pub fn qubo_vector(&self, sides: &[bool]) -> Vec<bool> {
        let flip = sides[self.root_vertex];
        (0..sides.len()).filter(|&v| v != self.root_vertex).map(|v| sides[v] ^ flip).collect()
    }

    /// For `QuboToMaxcut`: the bipartition of a QUBO vector.
    pub fn sides_of(&self, x: &[bool]) -> Vec<bool> {
        let mut sides = Vec::with_capacity(x.len() + 1);
        sides.push(false);
        sides.extend_from_slice(x);
        sides
    }
}

/// QUBO on `n` variables to max-cut on `n + 1` vertices; vertex 0 is the
/// root and vertex `i + 1` carries variable `i`.
pub fn qubo_to_maxcut(q: &RawQuboInstance) -> (RawMaxCutInstance, TransformCertificate) {
    let n = q.n;
    // linear[i] = S_ii + Σ_{j≠i} S_ij; pair weights S_ij for i < j.
    let mut linear = vec![0.0; n];
    let mut pairs = Vec::new();
    for e in &q.entries {
        if e.i == e.j {
            linear[e.i] += e.q;
        } else {
            let half = e.q / 2.0;
            linear[e.i] += half;
            linear[e.j] += half;
            pairs.push((e.i + 1, e.j + 1, half));
        }
    }
    let root_edges = (0..n).map(|i| (0, i + 1, -linear[i]));
    let mut raw = RawMaxCutInstance::from_edges(n + 1, root_edges.chain(pairs));
    raw.edges.retain(|e| e.w != 0.0);
    (
        raw,
        TransformCertificate { direction: TransformDirection::QuboToMaxcut, constant_offset: 0.0, root_vertex: 0 },
    )
}

/// Max-cut on `|V|` vertices to a QUBO on `|V| - 1` variables; vertex 0 is
/// pinned to side 0 and variable `i` is the side of vertex `i + 1`.
pub fn maxcut_to_qubo(g: &RawMaxCutInstance) -> (RawQuboInstance, TransformCertificate) {
    let n = g.num_vertices.saturating_sub(1);
    let mut entries = Vec::new();
    for e in &g.edges {
        if e.w == 0.0 {
            continue;
        }
        // -w·[y_u ≠ y_v] = -w·y_u - w·y_v + 2w·y_u·y_v, with y_0 = 0.
        for v in [e.u, e.v] {
            if v > 0 {
                entries.push((v - 1, v - 1, -e.w));
            }
        }
        if e.u > 0 {
            entries.push((e.u - 1, e.v - 1, 2.0 * e.w));
        }
    }
    let mut q = RawQuboInstance::from_entries(n, entries);
    q.entries.retain(|e| e.q != 0.0);
    (
        q,
        TransformCertificate { direction: TransformDirection::MaxcutToQubo, constant_offset: 0.0, root_vertex: 0 },
    )
}
