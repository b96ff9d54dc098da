//! Reading and writing instances and solver reports.
//!
//! Two plain-text instance formats are understood, both whitespace separated
//! with 1-based indices and `#` / `%` comment lines:
//!
//! * max-cut (`.mc`): header `n m`, followed by `m` lines `u v w`;
//! * QUBO (`.bq`): header `n nnz`, followed by `nnz` lines `i j q`.
//!
//! Duplicate entries are summed in both formats. Internally every index is
//! 0-based.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: index {index} out of range 1..={max}")]
    IndexOutOfRange { line: usize, index: usize, max: usize },
    #[error("header announces {expected} entries but {found} were given")]
    CountMismatch { expected: usize, found: usize },
    #[error("missing header line")]
    MissingHeader,
}

/// A single weighted edge with 0-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// A max-cut instance as read from disk, after duplicate merging.
///
/// Edges are stored with `u < v`, sorted by `(u, v)`. Zero weights (also
/// those produced by cancelling duplicates) are kept here and dropped when
/// the graph is built.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMaxCutInstance {
    pub num_vertices: usize,
    pub edges: Vec<RawEdge>,
}

impl RawMaxCutInstance {
    /// Builds an instance from arbitrary edge triples, merging duplicates by
    /// summation. Panics on self-loops or out-of-range endpoints.
    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut list: Vec<RawEdge> = edges
            .into_iter()
            .map(|(a, b, w)| {
                assert!(a != b, "self-loop on vertex {a}");
                assert!(a < num_vertices && b < num_vertices, "edge endpoint out of range");
                RawEdge { u: a.min(b), v: a.max(b), w }
            })
            .collect();
        merge_sorted(&mut list);
        RawMaxCutInstance { num_vertices, edges: list }
    }

    /// True when every weight is an integer (enables floor rounding of
    /// dual bounds).
    pub fn is_integral(&self) -> bool {
        self.edges.iter().all(|e| is_integral_value(e.w))
    }
}

fn merge_sorted(list: &mut Vec<RawEdge>) {
    list.sort_by_key(|e| (e.u, e.v));
    let mut out: Vec<RawEdge> = Vec::with_capacity(list.len());
    for e in list.drain(..) {
        match out.last_mut() {
            Some(last) if last.u == e.u && last.v == e.v => last.w += e.w,
            _ => out.push(e),
        }
    }
    *list = out;
}

pub(crate) fn is_integral_value(w: f64) -> bool {
    w.is_finite() && w.fract() == 0.0 && w.abs() < 9.0e15
}

/// One sparse coefficient `q` at `(i, j)` of a QUBO matrix, 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuboEntry {
    pub i: usize,
    pub j: usize,
    pub q: f64,
}

/// A QUBO instance `min x^T Q x`, `x ∈ {0,1}^n`, as sparse entries.
///
/// Duplicate `(i, j)` positions are summed; `(i, j)` and `(j, i)` stay
/// distinct entries here and are symmetrized by the transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawQuboInstance {
    pub n: usize,
    pub entries: Vec<QuboEntry>,
}

impl RawQuboInstance {
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut list: Vec<QuboEntry> = entries
            .into_iter()
            .map(|(i, j, q)| {
                assert!(i < n && j < n, "QUBO index out of range");
                QuboEntry { i, j, q }
            })
            .collect();
        list.sort_by_key(|e| (e.i, e.j));
        let mut out: Vec<QuboEntry> = Vec::with_capacity(list.len());
        for e in list {
            match out.last_mut() {
                Some(last) if last.i == e.i && last.j == e.j => last.q += e.q,
                _ => out.push(e),
            }
        }
        RawQuboInstance { n, entries: out }
    }

    /// Evaluates `x^T Q x`.
    pub fn evaluate(&self, x: &[bool]) -> f64 {
        self.entries
            .iter()
            .filter(|e| x[e.i] && x[e.j])
            .map(|e| e.q)
            .sum()
    }
}

/// Iterates the data lines of a text, skipping blanks and comments, yielding
/// `(1-based line number, tokens)`.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, line)| {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            None
        } else {
            Some((idx + 1, t.split_whitespace().collect()))
        }
    })
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>().map_err(|_| ParseError::Malformed {
        line,
        msg: format!("expected {what}, got '{tok}'"),
    })
}

fn parse_weight(tok: &str, line: usize) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(w) if w.is_finite() => Ok(w),
        _ => Err(ParseError::Malformed { line, msg: format!("expected a decimal weight, got '{tok}'") }),
    }
}

fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
) -> Result<(usize, usize, usize), ParseError> {
    let (line, toks) = lines.next().ok_or(ParseError::MissingHeader)?;
    if toks.len() != 2 {
        return Err(ParseError::Malformed { line, msg: "header must be 'n m'".into() });
    }
    let n = parse_usize(toks[0], line, "vertex count")?;
    let m = parse_usize(toks[1], line, "entry count")?;
    if n == 0 {
        return Err(ParseError::Malformed { line, msg: "dimension must be positive".into() });
    }
    Ok((line, n, m))
}

fn parse_triple(toks: &[&str], line: usize, n: usize) -> Result<(usize, usize, f64), ParseError> {
    if toks.len() != 3 {
        return Err(ParseError::Malformed { line, msg: format!("expected 3 fields, got {}", toks.len()) });
    }
    let a = parse_usize(toks[0], line, "index")?;
    let b = parse_usize(toks[1], line, "index")?;
    for idx in [a, b] {
        if idx == 0 || idx > n {
            return Err(ParseError::IndexOutOfRange { line, index: idx, max: n });
        }
    }
    Ok((a - 1, b - 1, parse_weight(toks[2], line)?))
}

/// Parses a max-cut edge list (`n m` header, `u v w` lines).
pub fn parse_maxcut(text: &str) -> Result<RawMaxCutInstance, ParseError> {
    let mut lines = data_lines(text);
    let (_, n, m) = parse_header(&mut lines)?;
    let mut edges = Vec::with_capacity(m);
    for (line, toks) in lines {
        let (u, v, w) = parse_triple(&toks, line, n)?;
        if u == v {
            return Err(ParseError::SelfLoop { line, vertex: u + 1 });
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(ParseError::CountMismatch { expected: m, found: edges.len() });
    }
    Ok(RawMaxCutInstance::from_edges(n, edges))
}

/// Parses a sparse QUBO (`n nnz` header, `i j q` lines).
pub fn parse_qubo(text: &str) -> Result<RawQuboInstance, ParseError> {
    let mut lines = data_lines(text);
    let (_, n, nnz) = parse_header(&mut lines)?;
    let mut entries = Vec::with_capacity(nnz);
    for (line, toks) in lines {
        entries.push(parse_triple(&toks, line, n)?);
    }
    if entries.len() != nnz {
        return Err(ParseError::CountMismatch { expected: nnz, found: entries.len() });
    }
    Ok(RawQuboInstance::from_entries(n, entries))
}

/// Writes the canonical text form of a max-cut instance.
pub fn write_maxcut(inst: &RawMaxCutInstance) -> String {
    let mut out = format!("{} {}\n", inst.num_vertices, inst.edges.len());
    for e in &inst.edges {
        let _ = writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.w);
    }
    out
}

/// Writes the canonical text form of a QUBO instance.
pub fn write_qubo(inst: &RawQuboInstance) -> String {
    let mut out = format!("{} {}\n", inst.n, inst.entries.len());
    for e in &inst.entries {
        let _ = writeln!(out, "{} {} {}", e.i + 1, e.j + 1, e.q);
    }
    out
}

/// Sniffs whether a text looks like a QUBO file rather than an edge list.
///
/// Only diagonal entries (`i == j`) are a reliable tell, since edge lists
/// never contain them; anything else is treated as max-cut.
pub fn looks_like_qubo(text: &str) -> bool {
    data_lines(text)
        .skip(1)
        .any(|(_, t)| t.len() == 3 && t[0] == t[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    TimeLimit,
    NodeLimit,
    InfeasibleInput,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::InfeasibleInput => "infeasible_input",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Maxcut,
    Qubo,
}

/// Outcome of a solver run, in the sense of the original input.
///
/// For max-cut inputs `best_value` is a cut weight (maximized) and
/// `partition` holds one side flag per vertex. For QUBO inputs `best_value`
/// is the minimum of `x^T Q x` found and `partition` is the vector `x`.
///
/// JSON keys, in order: `problem`, `status`, `best_value`, `dual_bound`,
/// `primal_dual_gap_percent`, `bnb_nodes`, `wall_time_s`, `partition`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultReport {
    pub problem: ProblemKind,
    pub status: SolveStatus,
    pub best_value: f64,
    pub dual_bound: f64,
    pub primal_dual_gap_percent: f64,
    pub bnb_nodes: u64,
    pub wall_time_s: f64,
    pub partition: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

/// Relative gap in percent between a primal and a dual value, measured
/// against the larger magnitude of the two. Zero when they agree to 1e-9.
pub fn gap_percent(primal: f64, dual: f64) -> f64 {
    let diff = (dual - primal).abs();
    if diff <= 1e-9 * primal.abs().max(1.0) {
        return 0.0;
    }
    100.0 * diff / primal.abs().max(dual.abs())
}

/// Serializes a report. Output is deterministic for a given report.
pub fn write_report(report: &ResultReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "problem: {}", match report.problem {
                ProblemKind::Maxcut => "maxcut",
                ProblemKind::Qubo => "qubo",
            });
            let _ = writeln!(s, "status: {}", report.status.as_str());
            let _ = writeln!(s, "best_value: {}", report.best_value);
            let _ = writeln!(s, "dual_bound: {}", report.dual_bound);
            let _ = writeln!(s, "primal_dual_gap_percent: {}", report.primal_dual_gap_percent);
            let _ = writeln!(s, "bnb_nodes: {}", report.bnb_nodes);
            let _ = writeln!(s, "wall_time_s: {:.3}", report.wall_time_s);
            let bits: String = report.partition.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
            let _ = writeln!(s, "partition: {bits}");
            s
        }
    }
}

pub fn parse_report_json(text: &str) -> Result<ResultReport, serde_json::Error> {
    serde_json::from_str(text)
}
