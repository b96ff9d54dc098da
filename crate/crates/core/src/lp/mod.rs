//! LP relaxation over edge variables with cycle-inequality rows.

mod pool;
mod simplex;

pub use pool::{CutError, CutPool, CycleCut, AGE_LIMIT, PURGE_SLACK, VIOLATION_TOL};
pub use simplex::DualSimplex;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("numerical failure in the simplex")]
    Numerical,
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

/// Optimal LP solution data.
#[derive(Debug, Clone)]
pub struct LpState {
    /// Edge values, clamped into their bounds.
    pub x: Vec<f64>,
    /// `wᵀx`.
    pub objective: f64,
    /// Upper bound from the row duals: valid for every cut that satisfies
    /// the current bounds, whatever the numerical state of the basis.
    pub dual_bound: f64,
    /// Per edge, the decrease of `dual_bound` per unit increase of `x(e)`
    /// (nonnegative at the lower bound, nonpositive at the upper bound).
    pub reduced_costs: Vec<f64>,
    pub basis: Vec<BasisStatus>,
    /// `rhs - lhs` per row.
    pub slacks: Vec<f64>,
    /// Row duals, nonnegative.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpState),
    /// No point satisfies the rows and bounds.
    Infeasible,
}

/// The narrow interface the branch-and-cut driver needs from an LP solver.
pub trait LpBackend {
    fn set_bounds(&mut self, bounds: &[Option<bool>]);
    fn add_cut_rows(&mut self, cuts: &[CycleCut]);
    fn remove_rows(&mut self, rows: &[usize]);
    fn solve(&mut self) -> Result<LpOutcome, LpError>;
    fn solve_cold(&mut self) -> Result<LpOutcome, LpError>;
}

impl LpBackend for DualSimplex {
    fn set_bounds(&mut self, bounds: &[Option<bool>]) {
        DualSimplex::set_bounds(self, bounds)
    }

    fn add_cut_rows(&mut self, cuts: &[CycleCut]) {
        self.add_rows(
            cuts.iter()
                .map(|c| simplex::Row {
                    idx: c.edges.clone(),
                    coef: c.f_mask.iter().map(|&f| if f { 1.0 } else { -1.0 }).collect(),
                    rhs: c.rhs,
                })
                .collect(),
        )
    }

    fn remove_rows(&mut self, rows: &[usize]) {
        DualSimplex::remove_rows(self, rows)
    }

    fn solve(&mut self) -> Result<LpOutcome, LpError> {
        DualSimplex::solve(self)
    }

    fn solve_cold(&mut self) -> Result<LpOutcome, LpError> {
        DualSimplex::solve_cold(self)
    }
}

/// A cut pool kept in sync with the rows of an LP backend: pool entry `i`
/// is LP row `i`.
pub struct Relaxation<B: LpBackend = DualSimplex> {
    pub pool: CutPool,
    backend: B,
}

impl Relaxation<DualSimplex> {
    pub fn new(weights: Vec<f64>) -> Self {
        Relaxation { pool: CutPool::new(), backend: DualSimplex::new(weights) }
    }
}

impl<B: LpBackend> Relaxation<B> {
    pub fn with_backend(backend: B) -> Self {
        Relaxation { pool: CutPool::new(), backend }
    }

    /// Inserts new cuts; duplicates of active cuts are skipped.
    pub fn add_cuts(&mut self, cuts: Vec<CycleCut>) -> Result<usize, CutError> {
        let before = self.pool.len();
        let added = self.pool.add_cuts(cuts)?;
        self.backend.add_cut_rows(&self.pool.cuts()[before..]);
        Ok(added)
    }

    /// Solves under the given per-edge bounds.
    pub fn solve(&mut self, bounds: &[Option<bool>]) -> Result<LpOutcome, LpError> {
        self.backend.set_bounds(bounds);
        self.backend.solve()
    }

    pub fn solve_cold(&mut self, bounds: &[Option<bool>]) -> Result<LpOutcome, LpError> {
        self.backend.set_bounds(bounds);
        self.backend.solve_cold()
    }

    /// Ages the pool against `lp` and drops cuts slack for too long.
    pub fn purge_cuts(&mut self, lp: &LpState) -> usize {
        let removed = self.pool.purge_cuts(lp);
        self.backend.remove_rows(&removed);
        removed.len()
    }
}
