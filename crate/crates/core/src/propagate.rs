//! Reduced-cost fixing of edges and of vertex sides.
//!
//! All tests use the bound `Ũ` of an optimal [`LpState`] and an incumbent
//! weight `L`. A fixing removes only solutions worth less than `L`.

use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::lp::{BasisStatus, LpState};

const MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no cut within the node bounds reaches the incumbent")]
pub struct Infeasible;

/// True if every solution bounded by `bound` is worse than `incumbent`.
fn excluded(bound: f64, incumbent: f64) -> bool {
    bound < incumbent - MARGIN
}

/// Edge fixings from single reduced costs. Edges already fixed in
/// `bounds` and basic edges are skipped.
pub fn reduced_cost_fix(lp: &LpState, bounds: &[Option<bool>], incumbent: f64) -> Vec<(usize, bool)> {
    let u = lp.dual_bound;
    let mut out = Vec::new();
    for (e, &d) in lp.reduced_costs.iter().enumerate() {
        if bounds[e].is_some() {
            continue;
        }
        match lp.basis[e] {
            BasisStatus::AtLower if d > 0.0 && excluded(u - d, incumbent) => out.push((e, false)),
            BasisStatus::AtUpper if d < 0.0 && excluded(u + d, incumbent) => out.push((e, true)),
            _ => {}
        }
    }
    out
}

/// Sides implied by the fixed edges: one group per connected set of fixed
/// edges, its lowest vertex on side 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    pub side: Vec<Option<bool>>,
    /// Group of each assigned vertex; unassigned vertices carry `usize::MAX`.
    pub group: Vec<usize>,
}

impl PartialAssignment {
    pub fn is_empty(&self) -> bool {
        self.side.iter().all(Option::is_none)
    }
}

pub fn rebuild_partial_assignment(g: &WeightedGraph, bounds: &[Option<bool>]) -> Result<PartialAssignment, Infeasible> {
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (e, b) in bounds.iter().enumerate() {
        if let Some(cut) = *b {
            let ed = g.edge(e);
            adj[ed.u].push((ed.v, cut));
            adj[ed.v].push((ed.u, cut));
        }
    }
    let mut side = vec![None; n];
    let mut group = vec![usize::MAX; n];
    let mut groups = 0;
    for root in 0..n {
        if side[root].is_some() || adj[root].is_empty() {
            continue;
        }
        side[root] = Some(false);
        group[root] = groups;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let sv = side[v].expect("assigned");
            for &(w, cut) in &adj[v] {
                match side[w] {
                    None => {
                        side[w] = Some(sv ^ cut);
                        group[w] = groups;
                        stack.push(w);
                    }
                    Some(sw) if sw != sv ^ cut => return Err(Infeasible),
                    Some(_) => {}
                }
            }
        }
        groups += 1;
    }
    Ok(PartialAssignment { side, group })
}

/// Vertex fixings from summed reduced costs. For an unassigned `u` and one
/// group `K` of assigned neighbours, putting `u` on side `s` relative to `K`
/// forces every edge from `u` into `K`; the reduced costs of those forcings
/// add up to a penalty on `Ũ`. If the penalty for one side excludes the
/// incumbent, `u` goes to the other side and its edges into `K` are
/// returned as fixings. If both sides are excluded the node is infeasible.
pub fn implication_fix(
    lp: &LpState,
    bounds: &[Option<bool>],
    incumbent: f64,
    assignment: &PartialAssignment,
    g: &WeightedGraph,
) -> Result<Vec<(usize, bool)>, Infeasible> {
    let mut out = Vec::new();
    let mut by_group: Vec<(usize, usize, bool)> = Vec::new();
    for u in 0..g.vertex_count() {
        if assignment.side[u].is_some() {
            continue;
        }
        by_group.clear();
        for a in g.neighbors(u) {
            if let Some(s) = assignment.side[a.head] {
                if bounds[a.edge].is_none() {
                    by_group.push((assignment.group[a.head], a.edge, s));
                }
            }
        }
        if by_group.is_empty() {
            continue;
        }
        by_group.sort_unstable();
        for chunk in by_group.chunk_by(|a, b| a.0 == b.0) {
            // penalty[s]: cost of placing u on side s relative to the group.
            let mut penalty = [0.0f64; 2];
            for &(_, e, sv) in chunk {
                let d = lp.reduced_costs[e];
                for s in [false, true] {
                    let forced_cut = s != sv;
                    penalty[s as usize] += if forced_cut { d.max(0.0) } else { (-d).max(0.0) };
                }
            }
            let bad = [false, true].map(|s| excluded(lp.dual_bound - penalty[s as usize], incumbent));
            match bad {
                [true, true] => return Err(Infeasible),
                [false, false] => {}
                [zero_bad, _] => {
                    let s = zero_bad;
                    out.extend(chunk.iter().map(|&(_, e, sv)| (e, s != sv)));
                }
            }
        }
    }
    Ok(out)
}
