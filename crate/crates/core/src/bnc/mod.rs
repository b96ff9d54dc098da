//! Solver driver: presolve, decomposition into blocks, branch-and-cut per
//! block, and reassembly of the solution in the input's terms.

mod racing;
mod tree;

use std::time::{Duration, Instant};

use log::{info, warn};

pub use tree::{select_branching_edge, PseudoCostStats};

use racing::Exchange;
use tree::{ComponentResult, ComponentSolver, Stop};

use crate::graph::{biconnected_components, build_graph, cut_weight, CutSolution, ReductionTrace, WeightedGraph};
use crate::heuristics::{burer_rank2, DEFAULT_RESTARTS};
use crate::io::{gap_percent, ProblemKind, RawMaxCutInstance, RawQuboInstance, ResultReport, SolveStatus};
use crate::presolve::{presolve_loop, PresolveStats, DEFAULT_MAX_ROUNDS};
use crate::sepa::SeparationConfig;
use crate::transform::qubo_to_maxcut;

/// Largest component size accepted for exhaustive enumeration.
const MAX_ENUM_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    /// Relative gap at which the search stops; 0 asks for optimality.
    pub gap: f64,
    pub node_limit: Option<u64>,
    /// Components with at most this many vertices are enumerated.
    pub enum_threshold: usize,
    pub seed: u64,
    pub threads: usize,
    pub presolve: bool,
    pub presolve_rounds: usize,
    pub propagation: bool,
    pub heuristics: bool,
    pub heur_restarts: usize,
    pub separation: SeparationConfig,
    /// Keep every LP bound computed, with the bounds it was computed under.
    pub record_lp_bounds: bool,
    /// Whether racing workers exchange incumbents and root fixings.
    pub share_incumbents: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: Some(Duration::from_secs(3600)),
            gap: 0.0,
            node_limit: None,
            enum_threshold: 10,
            seed: 0,
            threads: 1,
            presolve: true,
            presolve_rounds: DEFAULT_MAX_ROUNDS,
            propagation: true,
            heuristics: true,
            heur_restarts: DEFAULT_RESTARTS,
            separation: SeparationConfig::default(),
            record_lp_bounds: false,
            share_incumbents: true,
        }
    }
}

/// An LP bound (rounded down for integral weights) and the edge fixings of
/// the node it belongs to, on the graph of `component`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpBoundRecord {
    pub component: usize,
    pub bounds: Vec<Option<bool>>,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Best cut of the input graph.
    pub solution: CutSolution,
    pub dual_bound: f64,
    pub status: SolveStatus,
    pub nodes: u64,
    pub presolve: Option<PresolveStats>,
    /// Blocks of the presolved graph, in the order the records refer to.
    pub components: Vec<WeightedGraph>,
    pub lp_records: Vec<LpBoundRecord>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub enum Instance {
    MaxCut(RawMaxCutInstance),
    Qubo(RawQuboInstance),
}

/// The presolved graph and its blocks with their vertex maps.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    original: WeightedGraph,
    reduced: WeightedGraph,
    trace: ReductionTrace,
    stats: Option<PresolveStats>,
    pub components: Vec<(WeightedGraph, Vec<usize>)>,
}

fn prepare(g: &WeightedGraph, cfg: &SolverConfig) -> Prepared {
    let (reduced, trace, stats) = if cfg.presolve {
        let p = presolve_loop(g, cfg.presolve_rounds.max(1));
        info!(
            "presolve: {} -> {} vertices, {} -> {} edges",
            p.stats.vertices_before, p.stats.vertices_after, p.stats.edges_before, p.stats.edges_after
        );
        (p.graph, p.trace, Some(p.stats))
    } else {
        (g.clone(), ReductionTrace::new(g.vertex_count()), None)
    };
    let blocks = biconnected_components(&reduced);
    let components: Vec<(WeightedGraph, Vec<usize>)> =
        blocks.blocks.iter().map(|b| reduced.edge_subgraph(&b.edges)).collect();
    info!(
        "decomposition: {} blocks, largest {} vertices",
        components.len(),
        components.iter().map(|c| c.0.vertex_count()).max().unwrap_or(0)
    );
    Prepared { original: g.clone(), reduced, trace, stats, components }
}

/// Exhaustive search over all bipartitions with vertex 0 on side 0, one
/// flip per step in Gray-code order.
pub fn enumerate_maxcut(g: &WeightedGraph) -> CutSolution {
    let n = g.vertex_count();
    assert!(n <= MAX_ENUM_VERTICES + 1, "enumeration on {n} vertices");
    if n <= 1 {
        return CutSolution::empty(g);
    }
    let mut sides = vec![false; n];
    let mut weight = 0.0;
    let mut best = (0.0, sides.clone());
    for k in 1u64..1 << (n - 1) {
        let v = k.trailing_zeros() as usize + 1;
        let gain: f64 = g.neighbors(v).iter().map(|a| if sides[a.head] == sides[v] { a.weight } else { -a.weight }).sum();
        weight += gain;
        sides[v] = !sides[v];
        if weight > best.0 {
            best = (weight, sides.clone());
        }
    }
    CutSolution::new(g, best.1)
}

#[derive(Debug, Clone)]
pub(crate) struct PreparedOutcome {
    results: Vec<ComponentResult>,
    nodes: u64,
}

impl PreparedOutcome {
    pub fn complete(&self) -> bool {
        self.results.iter().all(|r| r.stop == Stop::Finished)
    }

    pub fn primal(&self) -> f64 {
        self.results.iter().map(|r| r.solution.weight).sum()
    }

    /// Takes, per component, the smallest dual bound any outcome proved.
    pub fn tighten_with(&mut self, others: &[PreparedOutcome]) {
        for (i, r) in self.results.iter_mut().enumerate() {
            for o in others {
                if let Some(x) = o.results.get(i) {
                    r.dual_bound = r.dual_bound.min(x.dual_bound).max(r.solution.weight);
                }
            }
        }
    }
}

/// Solves every component in order; after a limit is hit the remaining
/// components only get a heuristic cut and the trivial bound.
pub(crate) fn solve_prepared(
    prep: &Prepared,
    cfg: &SolverConfig,
    mut exchange: Option<&mut Exchange>,
    mut records: Option<&mut Vec<LpBoundRecord>>,
    start: Instant,
) -> PreparedOutcome {
    let mut results = Vec::with_capacity(prep.components.len());
    let mut nodes = 0u64;
    let mut halted = false;
    for (i, (g, _)) in prep.components.iter().enumerate() {
        let n = g.vertex_count();
        if n <= cfg.enum_threshold.min(MAX_ENUM_VERTICES) {
            let s = enumerate_maxcut(g);
            results.push(ComponentResult { dual_bound: s.weight, solution: s, nodes: 0, stop: Stop::Finished });
            continue;
        }
        if halted {
            let s = if cfg.heuristics { burer_rank2(g, cfg.seed, None, 1) } else { CutSolution::empty(g) };
            let trivial = g.positive_weight_sum();
            let stop = results.last().map_or(Stop::TimeLimit, |r: &ComponentResult| r.stop);
            results.push(ComponentResult { dual_bound: trivial.max(s.weight), solution: s, nodes: 0, stop });
            continue;
        }
        let budget = cfg.node_limit.map(|l| l.saturating_sub(nodes));
        let solver = ComponentSolver::new(g, cfg, cfg.seed.wrapping_add(i as u64), i, start, budget, exchange.as_deref_mut(), records.as_deref_mut());
        let r = solver.run();
        nodes += r.nodes;
        info!("component {i}: {} vertices, value {}, bound {}, {} nodes", n, r.solution.weight, r.dual_bound, r.nodes);
        halted = r.stop != Stop::Finished;
        results.push(r);
    }
    PreparedOutcome { results, nodes }
}

/// Glues block solutions along the block-cut tree: each block is flipped
/// to agree with the one vertex it shares with blocks placed before it.
fn stitch(n: usize, components: &[(WeightedGraph, Vec<usize>)], solutions: &[&[bool]]) -> Vec<bool> {
    let mut blocks_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (b, (_, map)) in components.iter().enumerate() {
        for &v in map {
            blocks_of[v].push(b);
        }
    }
    let mut side: Vec<Option<bool>> = vec![None; n];
    let mut seen = vec![false; components.len()];
    let mut queue = std::collections::VecDeque::new();
    for b0 in 0..components.len() {
        if seen[b0] {
            continue;
        }
        seen[b0] = true;
        queue.push_back(b0);
        while let Some(b) = queue.pop_front() {
            let map = &components[b].1;
            let sol = solutions[b];
            let flip = map.iter().enumerate().find_map(|(l, &v)| side[v].map(|s| s != sol[l])).unwrap_or(false);
            for (l, &v) in map.iter().enumerate() {
                debug_assert!(side[v].is_none_or(|s| s == sol[l] ^ flip));
                side[v] = Some(sol[l] ^ flip);
                for &nb in &blocks_of[v] {
                    if !seen[nb] {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
        }
    }
    side.into_iter().map(|s| s.unwrap_or(false)).collect()
}

fn finish(prep: &Prepared, out: PreparedOutcome, records: Vec<LpBoundRecord>, cfg: &SolverConfig, start: Instant) -> SolveOutcome {
    let sols: Vec<&[bool]> = out.results.iter().map(|r| r.solution.sides.as_slice()).collect();
    let reduced_sides = stitch(prep.reduced.vertex_count(), &prep.components, &sols);
    let sides = prep.trace.lift(&reduced_sides);
    let solution = CutSolution::new(&prep.original, sides);
    let offset = prep.trace.offset();
    let claimed = out.primal() + offset;
    if (claimed - solution.weight).abs() > 1e-6 * claimed.abs().max(1.0) {
        warn!("lifted cut weighs {} but components claim {}", solution.weight, claimed);
    }
    let mut dual: f64 = out.results.iter().map(|r| r.dual_bound).sum::<f64>() + offset;
    if prep.original.is_integral() {
        dual = (dual + 1e-6).floor();
    }
    let dual = dual.max(solution.weight);
    let tol = 1e-6 * solution.weight.abs().max(1.0);
    let status = if out.complete() && dual - solution.weight <= tol {
        SolveStatus::Optimal
    } else if out.complete() {
        SolveStatus::GapLimit
    } else if out.results.iter().any(|r| r.stop == Stop::NodeLimit) {
        SolveStatus::NodeLimit
    } else {
        SolveStatus::TimeLimit
    };
    let components = if cfg.record_lp_bounds { prep.components.iter().map(|c| c.0.clone()).collect() } else { Vec::new() };
    SolveOutcome {
        solution,
        dual_bound: dual,
        status,
        nodes: out.nodes,
        presolve: prep.stats.clone(),
        components,
        lp_records: records,
        wall_time: start.elapsed(),
    }
}

/// Single-threaded, deterministic solve of a max-cut graph.
pub fn solve_graph(g: &WeightedGraph, cfg: &SolverConfig) -> SolveOutcome {
    let start = Instant::now();
    let prep = prepare(g, cfg);
    let mut records = Vec::new();
    let rec = cfg.record_lp_bounds.then_some(&mut records);
    let out = solve_prepared(&prep, cfg, None, rec, start);
    finish(&prep, out, records, cfg, start)
}

/// Racing solve with `k` threads; `k = 1` is [`solve_graph`].
pub fn racing_solve_graph(g: &WeightedGraph, cfg: &SolverConfig, k: usize) -> SolveOutcome {
    if k <= 1 {
        return solve_graph(g, cfg);
    }
    let start = Instant::now();
    let prep = prepare(g, cfg);
    match racing::race(&prep, cfg, k, start) {
        Some(out) => finish(&prep, out, Vec::new(), cfg, start),
        None => {
            warn!("all racing workers failed; solving single-threaded");
            let out = solve_prepared(&prep, cfg, None, None, start);
            finish(&prep, out, Vec::new(), cfg, start)
        }
    }
}

fn report(instance: &Instance, cfg: &SolverConfig, k: usize) -> (ResultReport, SolveOutcome) {
    let (graph, kind, cert) = match instance {
        Instance::MaxCut(raw) => (build_graph(raw), ProblemKind::Maxcut, None),
        Instance::Qubo(q) => {
            let (raw, cert) = qubo_to_maxcut(q);
            (WeightedGraph::from_edges(raw.num_vertices, raw.edges.iter().map(|e| (e.u, e.v, e.w))), ProblemKind::Qubo, Some(cert))
        }
    };
    let out = racing_solve_graph(&graph, cfg, k);
    debug_assert_eq!(out.solution.weight, cut_weight(&graph, &out.solution.sides));
    let (best, dual, partition) = match cert {
        None => (out.solution.weight, out.dual_bound, out.solution.sides.clone()),
        Some(c) => (c.to_original(out.solution.weight), c.to_original(out.dual_bound), c.qubo_vector(&out.solution.sides)),
    };
    let rep = ResultReport {
        problem: kind,
        status: out.status,
        best_value: best,
        dual_bound: dual,
        primal_dual_gap_percent: gap_percent(best, dual),
        bnb_nodes: out.nodes,
        wall_time_s: out.wall_time.as_secs_f64(),
        partition: partition.into_iter().map(u8::from).collect(),
    };
    (rep, out)
}

/// Solves a max-cut or QUBO instance and reports in the input's terms: a
/// QUBO report carries the minimum of `xᵀQx` and the vector `x`.
pub fn solve(instance: &Instance, cfg: &SolverConfig) -> ResultReport {
    report(instance, cfg, 1).0
}

pub fn racing_solve(instance: &Instance, cfg: &SolverConfig, k: usize) -> ResultReport {
    report(instance, cfg, k).0
}

/// Like [`racing_solve`], also returning the underlying max-cut outcome.
pub fn solve_detailed(instance: &Instance, cfg: &SolverConfig) -> (ResultReport, SolveOutcome) {
    report(instance, cfg, cfg.threads.max(1))
}
