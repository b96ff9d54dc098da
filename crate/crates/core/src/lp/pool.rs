//! Cycle inequalities and the pool of active rows.

use std::collections::HashSet;

use thiserror::Error;

use super::LpState;

/// Minimum violation for a cut to be worth adding.
pub const VIOLATION_TOL: f64 = 1e-5;
/// Rows with more slack than this count as non-binding.
pub const PURGE_SLACK: f64 = 1e-7;
/// Consecutive non-binding solves after which a row is dropped.
pub const AGE_LIMIT: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("cycle inequality needs an odd set F, got |F| = {0}")]
    EvenF(usize),
    #[error("cycle inequality has {edges} edges but {flags} F flags")]
    LengthMismatch { edges: usize, flags: usize },
}

/// `Σ_{e ∈ F} x(e) - Σ_{e ∈ C∖F} x(e) ≤ |F| - 1` over the edges of a cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCut {
    pub edges: Vec<usize>,
    pub f_mask: Vec<bool>,
    pub rhs: f64,
}

impl CycleCut {
    pub fn new(edges: Vec<usize>, f_mask: Vec<bool>) -> Result<Self, CutError> {
        if edges.len() != f_mask.len() {
            return Err(CutError::LengthMismatch { edges: edges.len(), flags: f_mask.len() });
        }
        let f = f_mask.iter().filter(|&&b| b).count();
        if f % 2 == 0 {
            return Err(CutError::EvenF(f));
        }
        Ok(CycleCut { edges, f_mask, rhs: (f - 1) as f64 })
    }

    pub fn f_size(&self) -> usize {
        self.f_mask.iter().filter(|&&b| b).count()
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.edges.iter().zip(&self.f_mask).map(|(&e, &f)| if f { x[e] } else { -x[e] }).sum()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        self.lhs(x) - self.rhs
    }

    /// `Σ_F (1 - x) + Σ_{C∖F} x`; below 1 exactly when the cut is violated.
    pub fn walk_length(&self, x: &[f64]) -> f64 {
        1.0 - self.violation(x)
    }

    /// Order-independent identity of the inequality.
    pub fn key(&self) -> Vec<(usize, bool)> {
        let mut k: Vec<(usize, bool)> = self.edges.iter().copied().zip(self.f_mask.iter().copied()).collect();
        k.sort_unstable();
        k
    }
}

#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<CycleCut>,
    ages: Vec<u32>,
    keys: HashSet<Vec<(usize, bool)>>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[CycleCut] {
        &self.cuts
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn contains(&self, cut: &CycleCut) -> bool {
        self.keys.contains(&cut.key())
    }

    /// Appends cuts that are not already active; returns how many were new.
    /// A cut with even `|F|` rejects the whole batch.
    pub fn add_cuts(&mut self, cuts: Vec<CycleCut>) -> Result<usize, CutError> {
        for c in &cuts {
            if c.edges.len() != c.f_mask.len() {
                return Err(CutError::LengthMismatch { edges: c.edges.len(), flags: c.f_mask.len() });
            }
            let f = c.f_size();
            if f % 2 == 0 {
                return Err(CutError::EvenF(f));
            }
        }
        let mut added = 0;
        for c in cuts {
            if self.keys.insert(c.key()) {
                self.cuts.push(c);
                self.ages.push(0);
                added += 1;
            }
        }
        Ok(added)
    }

    /// Ages every row against `lp` and removes rows that stayed slack for
    /// [`AGE_LIMIT`] consecutive solves. Returns the removed row indices in
    /// increasing order.
    pub fn purge_cuts(&mut self, lp: &LpState) -> Vec<usize> {
        let mut removed = Vec::new();
        for (i, age) in self.ages.iter_mut().enumerate() {
            let slack = lp.slacks.get(i).copied().unwrap_or(0.0);
            if slack > PURGE_SLACK {
                *age += 1;
                if *age >= AGE_LIMIT {
                    removed.push(i);
                }
            } else {
                *age = 0;
            }
        }
        if removed.is_empty() {
            return removed;
        }
        let mut drop = vec![false; self.cuts.len()];
        for &i in &removed {
            drop[i] = true;
            self.keys.remove(&self.cuts[i].key());
        }
        let mut i = 0;
        self.cuts.retain(|_| {
            i += 1;
            !drop[i - 1]
        });
        let mut i = 0;
        self.ages.retain(|_| {
            i += 1;
            !drop[i - 1]
        });
        removed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::BasisStatus;

    fn state_with_slacks(slacks: Vec<f64>) -> LpState {
        LpState {
            x: vec![],
            objective: 0.0,
            dual_bound: 0.0,
            reduced_costs: vec![],
            basis: vec![BasisStatus::Basic; 0],
            duals: vec![0.0; slacks.len()],
            slacks,
            iterations: 0,
        }
    }

    #[test]
    fn triangle_cut_violated() {
        let c = CycleCut::new(vec![0, 1, 2], vec![true; 3]).unwrap();
        assert_eq!(c.rhs, 2.0);
        assert!((c.lhs(&[0.9, 0.9, 0.9]) - 2.7).abs() < 1e-12);
        assert!(c.violation(&[0.9, 0.9, 0.9]) > VIOLATION_TOL);
    }

    #[test]
    fn duplicates_rejected() {
        let mut pool = CutPool::new();
        let c = CycleCut::new(vec![0, 1, 2], vec![true; 3]).unwrap();
        assert_eq!(pool.add_cuts(vec![c.clone()]).unwrap(), 1);
        assert_eq!(pool.add_cuts(vec![c]).unwrap(), 0);
        // Same inequality listed in another order.
        let rotated = CycleCut::new(vec![2, 0, 1], vec![true; 3]).unwrap();
        assert_eq!(pool.add_cuts(vec![rotated]).unwrap(), 0);
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn even_f_is_error() {
        assert_eq!(CycleCut::new(vec![0, 1, 2, 3], vec![true, true, false, false]), Err(CutError::EvenF(2)));
        let bad = CycleCut { edges: vec![0, 1, 2, 3], f_mask: vec![true, true, false, false], rhs: 1.0 };
        let mut pool = CutPool::new();
        assert_eq!(pool.add_cuts(vec![bad]), Err(CutError::EvenF(2)));
        assert!(pool.is_empty());
    }

    #[test]
    fn binding_cut_retained_and_slack_cut_aged_out() {
        let mut pool = CutPool::new();
        pool.add_cuts(vec![
            CycleCut::new(vec![0, 1, 2], vec![true; 3]).unwrap(),
            CycleCut::new(vec![0, 1, 2], vec![true, false, false]).unwrap(),
        ])
        .unwrap();
        for round in 1..=AGE_LIMIT {
            let removed = pool.purge_cuts(&state_with_slacks(vec![0.0, 0.5]));
            if round < AGE_LIMIT {
                assert!(removed.is_empty());
                assert_eq!(pool.ages(), &[0, round]);
            } else {
                assert_eq!(removed, vec![1]);
            }
        }
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.ages(), &[0]);
    }

    #[test]
    fn empty_pool_purges_nothing() {
        let mut pool = CutPool::new();
        assert!(pool.purge_cuts(&state_with_slacks(vec![])).is_empty());
    }
}
