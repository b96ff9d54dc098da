//! Branch-and-cut on one biconnected component.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use log::{debug, info};

use super::racing::{Exchange, Message};
use super::{LpBoundRecord, SolverConfig};
use crate::graph::{CutSolution, WeightedGraph};
use crate::heuristics::{burer_rank2, spanning_tree_rounding};
use crate::lp::{LpOutcome, LpState, Relaxation};
use crate::propagate::{implication_fix, rebuild_partial_assignment, reduced_cost_fix};
use crate::sepa::separate_round;

const INTEGRALITY_TOL: f64 = 1e-6;
const TAILING_TOL: f64 = 1e-4;
const TAILING_ROUNDS: usize = 3;
const MAX_ROUNDS_PER_NODE: usize = 500;
const PC_EPS: f64 = 1e-6;

/// Per-edge sums of bound degradation per unit change, for both branches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PseudoCostStats {
    pub down_sum: Vec<f64>,
    pub down_count: Vec<u32>,
    pub up_sum: Vec<f64>,
    pub up_count: Vec<u32>,
}

impl PseudoCostStats {
    pub fn new(m: usize) -> Self {
        PseudoCostStats { down_sum: vec![0.0; m], down_count: vec![0; m], up_sum: vec![0.0; m], up_count: vec![0; m] }
    }

    pub fn record(&mut self, edge: usize, up: bool, per_unit: f64) {
        if up {
            self.up_sum[edge] += per_unit;
            self.up_count[edge] += 1;
        } else {
            self.down_sum[edge] += per_unit;
            self.down_count[edge] += 1;
        }
    }

    fn average(sum: &[f64], count: &[u32]) -> Option<f64> {
        let c: u32 = count.iter().sum();
        (c > 0).then(|| sum.iter().sum::<f64>() / c as f64)
    }

    fn is_empty(&self) -> bool {
        self.down_count.iter().chain(&self.up_count).all(|&c| c == 0)
    }
}

/// Picks the fractional, unfixed edge with the best pseudo-cost product
/// `max(down · x, ε) · max(up · (1 - x), ε)`. Before any pseudo-cost is
/// known, `|w| · min(x, 1 - x)` is used. Ties go to the lower edge id.
/// Returns `None` when no edge is fractional.
pub fn select_branching_edge(
    x: &[f64],
    bounds: &[Option<bool>],
    weights: &[f64],
    stats: &PseudoCostStats,
) -> Option<usize> {
    let fallback = stats.is_empty();
    let avg_down = PseudoCostStats::average(&stats.down_sum, &stats.down_count);
    let avg_up = PseudoCostStats::average(&stats.up_sum, &stats.up_count);
    let mut best: Option<(f64, usize)> = None;
    for (e, &xe) in x.iter().enumerate() {
        if bounds[e].is_some() || xe <= INTEGRALITY_TOL || xe >= 1.0 - INTEGRALITY_TOL {
            continue;
        }
        let score = if fallback {
            weights[e].abs() * xe.min(1.0 - xe)
        } else {
            let down = if stats.down_count[e] > 0 {
                stats.down_sum[e] / stats.down_count[e] as f64
            } else {
                avg_down.or(avg_up).unwrap_or(1.0)
            };
            let up = if stats.up_count[e] > 0 {
                stats.up_sum[e] / stats.up_count[e] as f64
            } else {
                avg_up.or(avg_down).unwrap_or(1.0)
            };
            (down * xe).max(PC_EPS) * (up * (1.0 - xe)).max(PC_EPS)
        };
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, e));
        }
    }
    best.map(|(_, e)| e)
}

#[derive(Debug, Clone, Copy)]
struct BranchInfo {
    edge: usize,
    up: bool,
    frac: f64,
    parent_bound: f64,
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Vec<Option<bool>>,
    bound: f64,
    depth: u32,
    id: u64,
    branch: Option<BranchInfo>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl Ord for Node {
    /// Best bound first, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(self.depth.cmp(&other.depth)).then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum NodeOutcome {
    Pruned,
    Solved,
    Branched(Node, Node),
    Interrupted(Node),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Finished,
    TimeLimit,
    NodeLimit,
    Cancelled,
}

#[derive(Debug, Clone)]
pub(crate) struct ComponentResult {
    pub solution: CutSolution,
    pub dual_bound: f64,
    pub nodes: u64,
    pub stop: Stop,
}

pub(crate) struct ComponentSolver<'a> {
    g: &'a WeightedGraph,
    cfg: &'a SolverConfig,
    seed: u64,
    component: usize,
    weights: Vec<f64>,
    integral: bool,
    rel: Relaxation,
    incumbent: CutSolution,
    pseudo: PseudoCostStats,
    open: BinaryHeap<Node>,
    next_id: u64,
    nodes: u64,
    node_budget: Option<u64>,
    /// Fixings valid in every node: root propagation and shared ones.
    global: Vec<Option<bool>>,
    /// Largest bound among nodes closed by the gap tolerance.
    gap_closed: f64,
    deadline: Option<Instant>,
    start: Instant,
    exchange: Option<&'a mut Exchange>,
    records: Option<&'a mut Vec<LpBoundRecord>>,
}

impl<'a> ComponentSolver<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g: &'a WeightedGraph,
        cfg: &'a SolverConfig,
        seed: u64,
        component: usize,
        start: Instant,
        node_budget: Option<u64>,
        exchange: Option<&'a mut Exchange>,
        records: Option<&'a mut Vec<LpBoundRecord>>,
    ) -> Self {
        let weights: Vec<f64> = g.edges().iter().map(|e| e.w).collect();
        ComponentSolver {
            g,
            cfg,
            seed,
            component,
            integral: g.is_integral(),
            rel: Relaxation::new(weights.clone()),
            weights,
            incumbent: CutSolution::empty(g),
            pseudo: PseudoCostStats::new(g.edge_count()),
            open: BinaryHeap::new(),
            next_id: 0,
            nodes: 0,
            node_budget,
            global: vec![None; g.edge_count()],
            gap_closed: f64::NEG_INFINITY,
            deadline: cfg.time_limit.map(|t| start + t),
            start,
            exchange,
            records,
        }
    }

    fn round_bound(&self, u: f64) -> f64 {
        if self.integral {
            (u + 1e-6).floor()
        } else {
            u
        }
    }

    fn closes(&self, u: f64) -> bool {
        let l = self.incumbent.weight;
        if self.integral {
            u <= l + 1e-6
        } else {
            u <= l + 1e-9 * l.abs().max(1.0)
        }
    }

    fn within_gap(&self, u: f64) -> bool {
        self.cfg.gap > 0.0 && u - self.incumbent.weight <= self.cfg.gap * self.incumbent.weight.abs().max(1e-9)
    }

    /// True if the node may be dropped; gap closures are remembered.
    fn prunable(&mut self, u: f64) -> bool {
        if self.closes(u) {
            return true;
        }
        if self.within_gap(u) {
            self.gap_closed = self.gap_closed.max(u);
            return true;
        }
        false
    }

    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn offer(&mut self, cut: CutSolution, warm_start: bool) {
        if cut.weight <= self.incumbent.weight + 1e-9 {
            return;
        }
        debug!("component {}: incumbent {} -> {}", self.component, self.incumbent.weight, cut.weight);
        self.incumbent = cut;
        if let Some(ex) = self.exchange.as_deref_mut() {
            if ex.share {
                ex.broadcast(Message::Incumbent {
                    component: self.component,
                    weight: self.incumbent.weight,
                    sides: self.incumbent.sides.clone(),
                });
            }
        }
        if warm_start && self.cfg.heuristics {
            let better = burer_rank2(self.g, self.seed ^ self.next_id, Some(&self.incumbent), 1);
            self.offer(better, false);
        }
    }

    /// Takes incumbents and root fixings sent by other workers.
    fn poll(&mut self) -> bool {
        let Some(ex) = self.exchange.as_deref_mut() else { return false };
        let msgs = ex.take_for(self.component);
        let cancelled = ex.cancelled();
        for m in msgs {
            match m {
                Message::Incumbent { weight, sides, .. } => {
                    if weight > self.incumbent.weight + 1e-9 {
                        let cut = CutSolution::new(self.g, sides);
                        if cut.weight > self.incumbent.weight + 1e-9 {
                            self.incumbent = cut;
                        }
                    }
                }
                Message::RootFixings { fixes, .. } => {
                    for (e, v) in fixes {
                        if self.global[e].is_none() {
                            self.global[e] = Some(v);
                        }
                    }
                }
            }
        }
        cancelled
    }

    fn solve_lp(&mut self, bounds: &[Option<bool>]) -> Option<Option<LpState>> {
        let outcome = match self.rel.solve(bounds) {
            Ok(o) => Some(o),
            Err(e) => {
                debug!("LP failed ({e}), retrying from scratch");
                self.rel.solve_cold(bounds).ok()
            }
        };
        outcome.map(|o| match o {
            LpOutcome::Optimal(s) => Some(s),
            LpOutcome::Infeasible => None,
        })
    }

    fn child(&mut self, parent: &Node, bounds: &[Option<bool>], edge: usize, up: bool, frac: f64, bound: f64) -> Node {
        let mut b = bounds.to_vec();
        b[edge] = Some(up);
        self.next_id += 1;
        Node {
            bounds: b,
            bound,
            depth: parent.depth + 1,
            id: self.next_id,
            branch: Some(BranchInfo { edge, up, frac, parent_bound: bound }),
        }
    }

    /// The cut encoded by an integral point, if it is one.
    fn cut_of(&self, x: &[f64]) -> Option<CutSolution> {
        if x.iter().any(|&v| v > INTEGRALITY_TOL && v < 1.0 - INTEGRALITY_TOL) {
            return None;
        }
        let b: Vec<Option<bool>> = x.iter().map(|&v| Some(v > 0.5)).collect();
        let a = rebuild_partial_assignment(self.g, &b).ok()?;
        Some(CutSolution::new(self.g, a.side.iter().map(|s| s.unwrap_or(false)).collect()))
    }

    /// Branching edge when the LP offers none: the heaviest unfixed edge.
    fn fallback_edge(&self, bounds: &[Option<bool>]) -> Option<usize> {
        (0..self.g.edge_count()).filter(|&e| bounds[e].is_none()).max_by(|&a, &b| {
            self.weights[a].abs().total_cmp(&self.weights[b].abs()).then(b.cmp(&a))
        })
    }

    fn split(&mut self, node: &Node, bounds: Vec<Option<bool>>, x: Option<&[f64]>, bound: f64) -> NodeOutcome {
        let picked = x.and_then(|x| select_branching_edge(x, &bounds, &self.weights, &self.pseudo).map(|e| (e, x[e])));
        let (edge, frac) = match picked.or_else(|| self.fallback_edge(&bounds).map(|e| (e, 0.5))) {
            Some(p) => p,
            None => {
                // Every edge is fixed: the bounds are the solution.
                if let Ok(a) = rebuild_partial_assignment(self.g, &bounds) {
                    let cut = CutSolution::new(self.g, a.side.iter().map(|s| s.unwrap_or(false)).collect());
                    self.offer(cut, false);
                }
                return NodeOutcome::Solved;
            }
        };
        let down = self.child(node, &bounds, edge, false, frac, bound);
        let up = self.child(node, &bounds, edge, true, frac, bound);
        NodeOutcome::Branched(down, up)
    }

    fn process_node(&mut self, node: Node) -> NodeOutcome {
        let mut bounds = node.bounds.clone();
        for (e, g) in self.global.iter().enumerate() {
            match (bounds[e], g) {
                (_, None) => {}
                (None, Some(v)) => bounds[e] = Some(*v),
                (Some(a), Some(b)) if a != *b => return NodeOutcome::Pruned,
                _ => {}
            }
        }
        let mut last = node.bound;
        let mut stall = 0;
        let mut first = true;
        for round in 0..MAX_ROUNDS_PER_NODE {
            if self.timed_out() {
                return NodeOutcome::Interrupted(Node { bounds, bound: last, ..node });
            }
            let lp = match self.solve_lp(&bounds) {
                Some(Some(lp)) => lp,
                Some(None) => return NodeOutcome::Pruned,
                None => return self.split(&node, bounds, None, last),
            };
            let raw = self.round_bound(lp.dual_bound);
            if let Some(rec) = self.records.as_deref_mut() {
                rec.push(LpBoundRecord { component: self.component, bounds: bounds.clone(), bound: raw });
            }
            if first {
                if let Some(b) = node.branch {
                    let delta = if b.up { 1.0 - b.frac } else { b.frac };
                    self.pseudo.record(b.edge, b.up, (b.parent_bound - raw).max(0.0) / delta.max(1e-9));
                }
                first = false;
            }
            let u = raw.min(last);
            if self.prunable(u) {
                return NodeOutcome::Pruned;
            }

            let mut changed = false;
            if self.cfg.propagation {
                let l = self.incumbent.weight;
                let mut fixes = reduced_cost_fix(&lp, &bounds, l);
                for &(e, v) in &fixes {
                    bounds[e] = Some(v);
                }
                match rebuild_partial_assignment(self.g, &bounds)
                    .and_then(|a| implication_fix(&lp, &bounds, l, &a, self.g))
                {
                    Ok(more) => {
                        for &(e, v) in &more {
                            bounds[e] = Some(v);
                        }
                        fixes.extend(more);
                    }
                    Err(_) => return NodeOutcome::Pruned,
                }
                if !fixes.is_empty() {
                    changed = true;
                    if node.depth == 0 {
                        for &(e, v) in &fixes {
                            self.global[e] = Some(v);
                        }
                        if let Some(ex) = self.exchange.as_deref_mut() {
                            if ex.share {
                                ex.broadcast(Message::RootFixings { component: self.component, fixes });
                            }
                        }
                    }
                }
            }

            if let Some(cut) = self.cut_of(&lp.x) {
                self.offer(cut, true);
                return NodeOutcome::Solved;
            }
            if self.cfg.heuristics {
                let cut = spanning_tree_rounding(self.g, &lp.x);
                self.offer(cut, true);
                if self.prunable(u) {
                    return NodeOutcome::Pruned;
                }
            }

            let cuts = separate_round(self.g, &lp.x, &self.cfg.separation);
            let msg = format!(
                "round {}: dual={}, primal={}, cuts=+{}, time={:.3}",
                round + 1,
                u,
                self.incumbent.weight,
                cuts.len(),
                self.start.elapsed().as_secs_f64()
            );
            if node.depth == 0 {
                info!("{msg}");
            } else {
                debug!("node {} {msg}", node.id);
            }
            if cuts.is_empty() && !changed {
                return self.split(&node, bounds, Some(&lp.x), u);
            }
            if last - u < TAILING_TOL * u.abs().max(1.0) {
                stall += 1;
            } else {
                stall = 0;
            }
            last = u;
            if stall >= TAILING_ROUNDS && !changed {
                return self.split(&node, bounds, Some(&lp.x), u);
            }
            self.rel.purge_cuts(&lp);
            self.rel.add_cuts(cuts).expect("separated cuts have odd F");
        }
        let lp = self.solve_lp(&bounds).flatten();
        let x = lp.as_ref().map(|s| s.x.clone());
        self.split(&node, bounds, x.as_deref(), last)
    }

    fn best_open_bound(&self) -> f64 {
        self.open.peek().map_or(f64::NEG_INFINITY, |n| n.bound)
    }

    pub fn run(mut self) -> ComponentResult {
        if self.cfg.heuristics {
            let start = burer_rank2(self.g, self.seed, None, self.cfg.heur_restarts);
            self.offer(start, false);
        }
        let root_bound = self.round_bound(self.weights.iter().map(|w| w.max(0.0)).sum());
        self.open.push(Node { bounds: vec![None; self.g.edge_count()], bound: root_bound, depth: 0, id: 0, branch: None });
        let mut stop = Stop::Finished;
        while let Some(node) = self.open.pop() {
            if self.poll() {
                self.open.push(node);
                stop = Stop::Cancelled;
                break;
            }
            if self.prunable(node.bound) {
                continue;
            }
            if self.timed_out() {
                self.open.push(node);
                stop = Stop::TimeLimit;
                break;
            }
            if self.node_budget.is_some_and(|b| self.nodes >= b) {
                self.open.push(node);
                stop = Stop::NodeLimit;
                break;
            }
            self.nodes += 1;
            match self.process_node(node) {
                NodeOutcome::Pruned | NodeOutcome::Solved => {}
                NodeOutcome::Branched(down, up) => {
                    self.open.push(down);
                    self.open.push(up);
                }
                NodeOutcome::Interrupted(n) => {
                    self.open.push(n);
                    stop = Stop::TimeLimit;
                    break;
                }
            }
        }
        let dual = self.best_open_bound().max(self.gap_closed).max(self.incumbent.weight);
        ComponentResult { solution: self.incumbent, dual_bound: dual, nodes: self.nodes, stop }
    }
}
