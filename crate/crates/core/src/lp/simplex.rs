//! Bounded-variable dual simplex with an explicit dense basis inverse.
//!
//! Internally the problem is `min cᵀx` with `c = -w`, rows `a_i x + s_i = b_i`
//! and slacks `s_i ≥ 0`. Variable `j < m` is structural, `m + i` is the
//! slack of row `i`.
//!
//! Rows whose slack is basic contribute identity columns to the basis, so
//! with `K` the basic structurals and `R` the rows with nonbasic slack the
//! basis is `[[A_RK, 0], [A_SK, I]]` and only `M = A_RK⁻¹` (`|K| = |R|`) is
//! stored. Every basis change is a rank-one update of `M`, possibly growing
//! or shrinking it by one row and column.

use super::{BasisStatus, LpError, LpOutcome, LpState};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
/// Updates between refactorizations, at least; the interval grows with
/// the size of the block so refactoring costs `O(k²)` per pivot.
const REFACTOR_EVERY: usize = 100;
const BLAND_AFTER: usize = 1000;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub idx: Vec<usize>,
    pub coef: Vec<f64>,
    pub rhs: f64,
}

/// `A_RK⁻¹`, rows indexed by position in `K`, columns by position in `R`.
#[derive(Debug, Clone, Default)]
struct BlockInverse {
    stride: usize,
    data: Vec<f64>,
}

impl BlockInverse {
    fn at(&self, b: usize, a: usize) -> f64 {
        self.data[b * self.stride + a]
    }

    fn row(&self, b: usize, k: usize) -> &[f64] {
        &self.data[b * self.stride..b * self.stride + k]
    }

    fn reserve(&mut self, k: usize, need: usize) {
        if need <= self.stride {
            return;
        }
        let stride = need.max(2 * self.stride).max(16);
        let mut data = vec![0.0; stride * stride];
        for b in 0..k {
            data[b * stride..b * stride + k].copy_from_slice(self.row(b, k));
        }
        self.stride = stride;
        self.data = data;
    }

    /// Moves row `from` onto row `to` and column `from` onto column `to`
    /// for a matrix of size `k`.
    fn swap_remove(&mut self, k: usize, row: usize, col: usize) {
        let last = k - 1;
        if row != last {
            let s = self.stride;
            self.data.copy_within(last * s..last * s + k, row * s);
        }
        if col != last {
            for b in 0..last {
                self.data[b * self.stride + col] = self.data[b * self.stride + last];
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DualSimplex {
    w: Vec<f64>,
    rows: Vec<Row>,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<BasisStatus>,
    /// Basic structurals, by position in `K`.
    kvars: Vec<usize>,
    /// Position in `K` per structural, or `NONE`.
    kpos: Vec<usize>,
    /// Rows with nonbasic slack, by position in `R`.
    rrows: Vec<usize>,
    /// Position in `R` per row, or `NONE`.
    rpos: Vec<usize>,
    inv: BlockInverse,
    x: Vec<f64>,
    d: Vec<f64>,
    valid_basis: bool,
    since_refactor: usize,
    iteration_limit: Option<usize>,
}

impl DualSimplex {
    /// An LP over `w.len()` variables in `[0, 1]` with no rows.
    pub fn new(w: Vec<f64>) -> Self {
        let m = w.len();
        DualSimplex {
            w,
            rows: Vec::new(),
            cols: vec![Vec::new(); m],
            lower: vec![0.0; m],
            upper: vec![1.0; m],
            status: vec![BasisStatus::AtLower; m],
            kvars: Vec::new(),
            kpos: vec![NONE; m],
            rrows: Vec::new(),
            rpos: Vec::new(),
            inv: BlockInverse::default(),
            x: vec![0.0; m],
            d: vec![0.0; m],
            valid_basis: false,
            since_refactor: 0,
            iteration_limit: None,
        }
    }

    pub fn structural_count(&self) -> usize {
        self.w.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn set_iteration_limit(&mut self, limit: Option<usize>) {
        self.iteration_limit = limit;
    }

    /// Fixes structurals to 0 or 1, or frees them to `[0, 1]`.
    pub fn set_bounds(&mut self, bounds: &[Option<bool>]) {
        assert_eq!(bounds.len(), self.w.len());
        for (j, b) in bounds.iter().enumerate() {
            let (l, u) = match b {
                None => (0.0, 1.0),
                Some(false) => (0.0, 0.0),
                Some(true) => (1.0, 1.0),
            };
            self.lower[j] = l;
            self.upper[j] = u;
        }
    }

    /// Appends `a x ≤ rhs` rows; their slacks enter the basis, which keeps a
    /// warm basis dual feasible and leaves `M` untouched.
    pub(crate) fn add_rows(&mut self, new_rows: Vec<Row>) {
        let r_old = self.rows.len();
        for (k, row) in new_rows.iter().enumerate() {
            for (&j, &a) in row.idx.iter().zip(&row.coef) {
                self.cols[j].push((r_old + k, a));
            }
            self.status.push(BasisStatus::Basic);
            self.x.push(0.0);
            self.d.push(0.0);
            self.rpos.push(NONE);
        }
        self.rows.extend(new_rows);
    }

    /// Removes rows; the basis survives when all removed slacks are basic.
    pub fn remove_rows(&mut self, remove: &[usize]) {
        if remove.is_empty() {
            return;
        }
        let m = self.w.len();
        let r = self.rows.len();
        let mut drop = vec![false; r];
        for &i in remove {
            drop[i] = true;
        }
        if (0..r).any(|i| drop[i] && self.status[m + i] != BasisStatus::Basic) {
            self.valid_basis = false;
        }
        let mut new_index = vec![NONE; r];
        let mut next = 0;
        for i in 0..r {
            if !drop[i] {
                new_index[i] = next;
                next += 1;
            }
        }
        let old_rows = std::mem::take(&mut self.rows);
        self.rows = old_rows.into_iter().enumerate().filter(|(i, _)| !drop[*i]).map(|(_, row)| row).collect();
        let keep = |v: &usize| *v < m || !drop[*v - m];
        let mut i = 0;
        self.status.retain(|_| {
            i += 1;
            keep(&(i - 1))
        });
        let mut i = 0;
        self.x.retain(|_| {
            i += 1;
            keep(&(i - 1))
        });
        let mut i = 0;
        self.d.retain(|_| {
            i += 1;
            keep(&(i - 1))
        });
        for col in &mut self.cols {
            col.retain(|&(i, _)| !drop[i]);
            for e in col.iter_mut() {
                e.0 = new_index[e.0];
            }
        }
        if self.valid_basis {
            for t in &mut self.rrows {
                *t = new_index[*t];
            }
            self.rpos = vec![NONE; self.rows.len()];
            for (a, &t) in self.rrows.iter().enumerate() {
                self.rpos[t] = a;
            }
        } else {
            self.rpos = vec![NONE; self.rows.len()];
            self.rrows.clear();
        }
    }

    fn bounds(&self, v: usize) -> (f64, f64) {
        let m = self.w.len();
        if v < m {
            (self.lower[v], self.upper[v])
        } else {
            (0.0, f64::INFINITY)
        }
    }

    fn cost(&self, v: usize) -> f64 {
        if v < self.w.len() {
            -self.w[v]
        } else {
            0.0
        }
    }

    /// Slack basis; each structural at the bound its cost prefers.
    fn cold_basis(&mut self) {
        let m = self.w.len();
        let r = self.rows.len();
        for j in 0..m {
            self.status[j] = if self.w[j] > 0.0 { BasisStatus::AtUpper } else { BasisStatus::AtLower };
        }
        for i in 0..r {
            self.status[m + i] = BasisStatus::Basic;
        }
        self.kvars.clear();
        self.rrows.clear();
        self.kpos = vec![NONE; m];
        self.rpos = vec![NONE; r];
        self.valid_basis = true;
        self.since_refactor = 0;
    }

    /// Recomputes `M` from the basic structurals and tight rows.
    fn refactor(&mut self) -> bool {
        let m = self.w.len();
        let r = self.rows.len();
        self.kvars = (0..m).filter(|&j| self.status[j] == BasisStatus::Basic).collect();
        self.rrows = (0..r).filter(|&i| self.status[m + i] != BasisStatus::Basic).collect();
        let k = self.kvars.len();
        if self.rrows.len() != k {
            return false;
        }
        self.kpos = vec![NONE; m];
        for (b, &j) in self.kvars.iter().enumerate() {
            self.kpos[j] = b;
        }
        self.rpos = vec![NONE; r];
        for (a, &i) in self.rrows.iter().enumerate() {
            self.rpos[i] = a;
        }
        let mut mat = vec![0.0; k * k];
        for (a, &i) in self.rrows.iter().enumerate() {
            let row = &self.rows[i];
            for (&j, &c) in row.idx.iter().zip(&row.coef) {
                let b = self.kpos[j];
                if b != NONE {
                    mat[a * k + b] += c;
                }
            }
        }
        let Some(minv) = invert(&mut mat, k) else {
            return false;
        };
        self.inv.stride = 0;
        self.inv.reserve(0, k);
        for b in 0..k {
            let s = self.inv.stride;
            self.inv.data[b * s..b * s + k].copy_from_slice(&minv[b * k..(b + 1) * k]);
        }
        self.since_refactor = 0;
        true
    }

    fn nonbasic_value(&self, v: usize) -> f64 {
        let (l, u) = self.bounds(v);
        match self.status[v] {
            BasisStatus::AtUpper => u,
            _ => l,
        }
    }

    fn row_activity(&self, i: usize) -> f64 {
        let row = &self.rows[i];
        row.idx.iter().zip(&row.coef).map(|(&j, &c)| c * self.x[j]).sum()
    }

    fn compute_primal(&mut self) {
        let m = self.w.len();
        let r = self.rows.len();
        for v in 0..m + r {
            if self.status[v] != BasisStatus::Basic {
                self.x[v] = self.nonbasic_value(v);
            }
        }
        let k = self.kvars.len();
        let rhs: Vec<f64> = self
            .rrows
            .iter()
            .map(|&i| {
                let row = &self.rows[i];
                let mut s = row.rhs - self.x[m + i];
                for (&j, &c) in row.idx.iter().zip(&row.coef) {
                    if self.kpos[j] == NONE {
                        s -= c * self.x[j];
                    }
                }
                s
            })
            .collect();
        for b in 0..k {
            self.x[self.kvars[b]] = self.inv.row(b, k).iter().zip(&rhs).map(|(a, s)| a * s).sum();
        }
        for i in 0..r {
            if self.rpos[i] == NONE {
                self.x[m + i] = self.rows[i].rhs - self.row_activity(i);
            }
        }
    }

    /// Simplex multipliers `y = c_Bᵀ B⁻¹` (min form); zero on rows whose
    /// slack is basic.
    fn multipliers(&self) -> Vec<f64> {
        let k = self.kvars.len();
        let mut y = vec![0.0; self.rows.len()];
        let mut yr = vec![0.0; k];
        for b in 0..k {
            let c = self.cost(self.kvars[b]);
            if c != 0.0 {
                for (acc, mv) in yr.iter_mut().zip(self.inv.row(b, k)) {
                    *acc += c * mv;
                }
            }
        }
        for (a, &i) in self.rrows.iter().enumerate() {
            y[i] = yr[a];
        }
        y
    }

    fn compute_duals(&mut self) {
        let m = self.w.len();
        let y = self.multipliers();
        for j in 0..m {
            self.d[j] = if self.status[j] == BasisStatus::Basic {
                0.0
            } else {
                -self.w[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
            };
        }
        for (i, yi) in y.iter().enumerate() {
            self.d[m + i] = if self.status[m + i] == BasisStatus::Basic { 0.0 } else { -yi };
        }
    }

    /// Moves boxed nonbasics to the bound their reduced cost prefers.
    /// Fails if a nonbasic slack is dual infeasible.
    fn restore_dual_feasibility(&mut self) -> bool {
        let m = self.w.len();
        for v in 0..self.status.len() {
            let st = self.status[v];
            if st == BasisStatus::Basic {
                continue;
            }
            if v >= m {
                if self.d[v] < -DUAL_TOL {
                    return false;
                }
                continue;
            }
            if st == BasisStatus::AtLower && self.d[v] < -DUAL_TOL {
                self.status[v] = BasisStatus::AtUpper;
            } else if st == BasisStatus::AtUpper && self.d[v] > DUAL_TOL {
                self.status[v] = BasisStatus::AtLower;
            }
        }
        true
    }

    /// `M` is kept current through row changes and bound changes, so a
    /// warm start only refactors when enough updates have piled up.
    fn prepare(&mut self, warm: bool) -> bool {
        let stale = !warm || self.since_refactor >= REFACTOR_EVERY.max(self.kvars.len()) / 2;
        if stale && !self.refactor() {
            return false;
        }
        self.compute_duals();
        if !self.restore_dual_feasibility() {
            return false;
        }
        self.compute_primal();
        true
    }

    /// Solves from the stored basis, falling back to the slack basis.
    pub fn solve(&mut self) -> Result<LpOutcome, LpError> {
        let mut last_err = LpError::Numerical;
        for attempt in 0..2 {
            let warm = attempt == 0 && self.valid_basis;
            if !warm {
                self.cold_basis();
            }
            if !self.prepare(warm) {
                if warm {
                    continue;
                }
                return Err(LpError::Numerical);
            }
            match self.run() {
                Ok(outcome) => return Ok(outcome),
                Err(e) => {
                    log::debug!("lp {} start failed: {e}", if warm { "warm" } else { "cold" });
                    last_err = e;
                    self.valid_basis = false;
                }
            }
        }
        Err(last_err)
    }

    /// Solves from the slack basis, ignoring any stored basis.
    pub fn solve_cold(&mut self) -> Result<LpOutcome, LpError> {
        self.valid_basis = false;
        self.solve()
    }

    /// Row `β` of `B⁻¹` for a leaving basic variable, over the rows of `R`
    /// (plus the leaving slack's own row, which gets 1).
    fn btran(&self, leaving: usize, beta_r: &mut [f64]) -> Option<usize> {
        let m = self.w.len();
        let k = self.kvars.len();
        if leaving < m {
            beta_r.copy_from_slice(self.inv.row(self.kpos[leaving], k));
            None
        } else {
            // β_R = -a_tK M.
            let t = leaving - m;
            beta_r.iter_mut().for_each(|v| *v = 0.0);
            let row = &self.rows[t];
            for (&j, &c) in row.idx.iter().zip(&row.coef) {
                let b = self.kpos[j];
                if b != NONE {
                    for (acc, mv) in beta_r.iter_mut().zip(self.inv.row(b, k)) {
                        *acc -= c * mv;
                    }
                }
            }
            Some(t)
        }
    }

    /// `M a_Rq` for an entering variable.
    fn ftran_k(&self, q: usize, out: &mut [f64]) {
        let m = self.w.len();
        let k = self.kvars.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut add = |a: usize, c: f64| {
            for (b, o) in out.iter_mut().enumerate() {
                *o += c * self.inv.data[b * self.inv.stride + a];
            }
        };
        if q < m {
            for &(i, c) in &self.cols[q] {
                let a = self.rpos[i];
                if a != NONE {
                    add(a, c);
                }
            }
        } else {
            let a = self.rpos[q - m];
            debug_assert!(a != NONE);
            add(a, 1.0);
        }
        debug_assert_eq!(out.len(), k);
    }

    /// Entry of `B⁻¹ a_q` at the basic slack of row `t`, given `α_K`.
    fn ftran_slack(&self, q: usize, t: usize, alpha_k: &[f64]) -> f64 {
        let row = &self.rows[t];
        let mut v = if q == self.w.len() + t { 1.0 } else { 0.0 };
        for (&j, &c) in row.idx.iter().zip(&row.coef) {
            if j == q {
                v += c;
            }
            let b = self.kpos[j];
            if b != NONE {
                v -= c * alpha_k[b];
            }
        }
        v
    }

    fn run(&mut self) -> Result<LpOutcome, LpError> {
        let m = self.w.len();
        let r = self.rows.len();
        let n = m + r;
        let limit = self.iteration_limit.unwrap_or(10_000 + 50 * n);
        let mut iterations = 0usize;
        let mut stall = 0usize;
        let mut alpha_row = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut beta_r: Vec<f64> = Vec::new();
        let mut alpha_k: Vec<f64> = Vec::new();
        // Dual Devex reference weights per basic variable.
        let mut weight = vec![1.0; n];
        loop {
            if self.since_refactor >= REFACTOR_EVERY.max(self.kvars.len()) {
                if !self.refactor() {
                    return Err(LpError::Numerical);
                }
                self.compute_duals();
                if !self.restore_dual_feasibility() {
                    return Err(LpError::Numerical);
                }
                self.compute_primal();
            }
            let bland = stall > BLAND_AFTER;
            let k = self.kvars.len();

            // Leaving variable: the most infeasible basic one.
            let mut leave: Option<(usize, f64)> = None;
            let basics = self.kvars.iter().copied().chain((0..r).filter(|&i| self.rpos[i] == NONE).map(|i| m + i));
            for v in basics {
                let (l, u) = self.bounds(v);
                let xv = self.x[v];
                let infeas = if xv < l - PRIMAL_TOL {
                    l - xv
                } else if xv > u + PRIMAL_TOL {
                    xv - u
                } else {
                    continue;
                };
                let infeas = infeas * infeas / weight[v];
                let better = match leave {
                    None => true,
                    Some((bv, bi)) => {
                        if bland {
                            v < bv
                        } else {
                            infeas > bi || (infeas == bi && v < bv)
                        }
                    }
                };
                if better {
                    leave = Some((v, infeas));
                }
            }
            let Some((lv, _)) = leave else {
                return Ok(LpOutcome::Optimal(self.state(iterations)));
            };
            iterations += 1;
            if iterations > limit {
                return Err(LpError::IterationLimit);
            }
            let (ll, lu) = self.bounds(lv);
            let to_lower = self.x[lv] < ll;
            let delta = if to_lower { self.x[lv] - ll } else { self.x[lv] - lu };

            // Pivot row over nonbasic variables.
            beta_r.resize(k, 0.0);
            let leaving_row = self.btran(lv, &mut beta_r);
            for &v in &touched {
                alpha_row[v] = 0.0;
            }
            touched.clear();
            let mut scatter = |i: usize, rho: f64, rows: &[Row]| {
                let row = &rows[i];
                for (&j, &c) in row.idx.iter().zip(&row.coef) {
                    if alpha_row[j] == 0.0 {
                        touched.push(j);
                    }
                    alpha_row[j] += rho * c;
                }
                alpha_row[m + i] = rho;
                touched.push(m + i);
            };
            for (a, &i) in self.rrows.iter().enumerate() {
                if beta_r[a] != 0.0 {
                    scatter(i, beta_r[a], &self.rows);
                }
            }
            if let Some(t) = leaving_row {
                scatter(t, 1.0, &self.rows);
            }
            touched.sort_unstable();
            touched.dedup();

            // Harris two-pass ratio test.
            let eligible = |v: usize, a: f64, st: BasisStatus| -> bool {
                if st == BasisStatus::Basic {
                    return false;
                }
                let (l, u) = self.bounds(v);
                if l == u {
                    return false;
                }
                match (st, to_lower) {
                    (BasisStatus::AtLower, true) | (BasisStatus::AtUpper, false) => a < -PIVOT_TOL,
                    _ => a > PIVOT_TOL,
                }
            };
            let mut theta_max = f64::INFINITY;
            for &v in &touched {
                let a = alpha_row[v];
                if eligible(v, a, self.status[v]) {
                    theta_max = theta_max.min((self.d[v].abs() + DUAL_TOL) / a.abs());
                }
            }
            if theta_max == f64::INFINITY {
                return Ok(LpOutcome::Infeasible);
            }
            let mut enter: Option<usize> = None;
            let mut best = 0.0;
            let mut best_ratio = f64::INFINITY;
            for &v in &touched {
                let a = alpha_row[v];
                if !eligible(v, a, self.status[v]) {
                    continue;
                }
                let ratio = self.d[v].abs() / a.abs();
                if ratio > theta_max {
                    continue;
                }
                let take = if bland {
                    ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && enter.is_none_or(|e| v < e))
                } else {
                    a.abs() > best
                };
                if take {
                    enter = Some(v);
                    best = a.abs();
                    best_ratio = ratio;
                }
            }
            let q = enter.expect("theta_max finite implies a candidate");

            // Pivot column.
            alpha_k.resize(k, 0.0);
            self.ftran_k(q, &mut alpha_k);
            let piv = match leaving_row {
                None => alpha_k[self.kpos[lv]],
                Some(t) => self.ftran_slack(q, t, &alpha_k),
            };
            if (piv - alpha_row[q]).abs() > 1e-7 * (1.0 + piv.abs()) || piv.abs() < PIVOT_TOL {
                if self.since_refactor == 0 {
                    return Err(LpError::Numerical);
                }
                self.since_refactor = usize::MAX;
                continue;
            }

            // Primal step: basic structurals move by -θ α_K, basic slacks
            // are recomputed from their rows.
            let theta_d = self.d[q] / alpha_row[q];
            let theta_p = delta / piv;
            for b in 0..k {
                let v = self.kvars[b];
                self.x[v] -= theta_p * alpha_k[b];
            }
            self.x[q] += theta_p;
            self.x[lv] = if to_lower { ll } else { lu };

            for &v in &touched {
                if self.status[v] == BasisStatus::Basic || v == q {
                    continue;
                }
                let a = alpha_row[v];
                if a != 0.0 {
                    let nd = self.d[v] - theta_d * a;
                    self.d[v] = match self.status[v] {
                        BasisStatus::AtLower if nd < 0.0 && self.bounds(v).0 != self.bounds(v).1 => 0.0,
                        BasisStatus::AtUpper if nd > 0.0 => 0.0,
                        _ => nd,
                    };
                }
            }
            self.d[lv] = -theta_d;
            self.d[q] = 0.0;
            self.status[lv] = if to_lower { BasisStatus::AtLower } else { BasisStatus::AtUpper };
            self.status[q] = BasisStatus::Basic;
            let wr = weight[lv].max(1e-12);
            for (b, &a) in alpha_k.iter().enumerate() {
                let v = self.kvars[b];
                if v != lv && a != 0.0 {
                    weight[v] = weight[v].max((a / piv).powi(2) * wr);
                }
            }
            for i in 0..r {
                if self.rpos[i] == NONE && m + i != lv {
                    let a = self.ftran_slack(q, i, &alpha_k);
                    if a != 0.0 {
                        weight[m + i] = weight[m + i].max((a / piv).powi(2) * wr);
                    }
                }
            }
            weight[q] = (wr / (piv * piv)).max(1.0);
            self.update_inverse(lv, q, leaving_row, &alpha_k, &beta_r, piv);
            for i in 0..r {
                if self.rpos[i] == NONE {
                    self.x[m + i] = self.rows[i].rhs - self.row_activity(i);
                }
            }
            self.since_refactor += 1;

            if (theta_d * delta).abs() < 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
        }
    }

    /// Applies the basis change `lv` out, `q` in to `M`. `alpha_k` is
    /// `M a_Rq`, `beta_r` the `R` part of the leaving row of `B⁻¹`.
    fn update_inverse(&mut self, lv: usize, q: usize, leaving_row: Option<usize>, alpha_k: &[f64], beta_r: &[f64], piv: f64) {
        let m = self.w.len();
        let k = self.kvars.len();
        match (leaving_row, q < m) {
            (None, true) => {
                // Structural for structural: replace column b of A_RK.
                let b = self.kpos[lv];
                let s = self.inv.stride;
                for v in &mut self.inv.data[b * s..b * s + k] {
                    *v /= piv;
                }
                let pivot_row: Vec<f64> = self.inv.row(b, k).to_vec();
                for (bb, &f) in alpha_k.iter().enumerate() {
                    if bb != b && f != 0.0 {
                        for (x, p) in self.inv.data[bb * s..bb * s + k].iter_mut().zip(&pivot_row) {
                            *x -= f * p;
                        }
                    }
                }
                self.kpos[lv] = NONE;
                self.kpos[q] = b;
                self.kvars[b] = q;
            }
            (None, false) => {
                // Slack of a tight row enters: drop row b and column a.
                let b = self.kpos[lv];
                let i = q - m;
                let a = self.rpos[i];
                let s = self.inv.stride;
                let col_a: Vec<f64> = (0..k).map(|bb| self.inv.at(bb, a)).collect();
                let row_b: Vec<f64> = self.inv.row(b, k).to_vec();
                for (bb, &f) in col_a.iter().enumerate() {
                    if bb != b && f != 0.0 {
                        let g = f / piv;
                        for (x, p) in self.inv.data[bb * s..bb * s + k].iter_mut().zip(&row_b) {
                            *x -= g * p;
                        }
                    }
                }
                self.inv.swap_remove(k, b, a);
                self.kpos[lv] = NONE;
                self.kvars.swap_remove(b);
                if b < self.kvars.len() {
                    self.kpos[self.kvars[b]] = b;
                }
                self.rpos[i] = NONE;
                self.rrows.swap_remove(a);
                if a < self.rrows.len() {
                    self.rpos[self.rrows[a]] = a;
                }
            }
            (Some(t), true) => {
                // Row t becomes tight and structural q basic: border M.
                // With v = a_tK M = -β_R, the new inverse is
                // [[M + α vᵀ/σ, -α/σ], [-vᵀ/σ, 1/σ]].
                self.inv.reserve(k, k + 1);
                let s = self.inv.stride;
                for (bb, &ab) in alpha_k.iter().enumerate() {
                    let row = &mut self.inv.data[bb * s..bb * s + k + 1];
                    if ab != 0.0 {
                        for (x, &br) in row[..k].iter_mut().zip(beta_r) {
                            *x -= ab * br / piv;
                        }
                    }
                    row[k] = -ab / piv;
                }
                let last = &mut self.inv.data[k * s..k * s + k + 1];
                for (x, &br) in last[..k].iter_mut().zip(beta_r) {
                    *x = br / piv;
                }
                last[k] = 1.0 / piv;
                self.kpos[q] = k;
                self.kvars.push(q);
                self.rpos[t] = k;
                self.rrows.push(t);
            }
            (Some(t), false) => {
                // Row t replaces tight row i in R: M - M e_a (v - e_a)ᵀ / v_a.
                let i = q - m;
                let a = self.rpos[i];
                let s = self.inv.stride;
                let va = -beta_r[a];
                let col_a: Vec<f64> = (0..k).map(|bb| self.inv.at(bb, a)).collect();
                for (bb, &f) in col_a.iter().enumerate() {
                    if f == 0.0 {
                        continue;
                    }
                    let g = f / va;
                    let row = &mut self.inv.data[bb * s..bb * s + k];
                    for (x, &br) in row.iter_mut().zip(beta_r) {
                        *x += g * br;
                    }
                    row[a] = f / va;
                }
                self.rpos[i] = NONE;
                self.rpos[t] = a;
                self.rrows[a] = t;
            }
        }
    }

    /// Snapshot at an optimal basis. The reported bound is the Lagrangian
    /// value of the clamped row duals, which is a valid upper bound even if
    /// the basis is slightly off.
    fn state(&self, iterations: usize) -> LpState {
        let m = self.w.len();
        let x: Vec<f64> = (0..m).map(|j| self.x[j].clamp(self.lower[j], self.upper[j])).collect();
        let y = self.multipliers();
        let duals: Vec<f64> = y.iter().map(|&yi| (-yi).max(0.0)).collect();
        let mut reduced = self.w.iter().map(|&w| -w).collect::<Vec<_>>();
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &c) in row.idx.iter().zip(&row.coef) {
                reduced[j] += duals[i] * c;
            }
        }
        let mut bound: f64 = self.rows.iter().zip(&duals).map(|(row, u)| u * row.rhs).sum();
        for j in 0..m {
            bound += (-reduced[j] * self.lower[j]).max(-reduced[j] * self.upper[j]);
        }
        let slacks: Vec<f64> = self
            .rows
            .iter()
            .map(|row| row.rhs - row.idx.iter().zip(&row.coef).map(|(&j, &c)| c * x[j]).sum::<f64>())
            .collect();
        let objective = self.w.iter().zip(&x).map(|(w, x)| w * x).sum();
        LpState {
            x,
            objective,
            dual_bound: bound,
            reduced_costs: reduced,
            basis: self.status[..m].to_vec(),
            slacks,
            duals,
            iterations,
        }
    }
}

/// Gauss–Jordan inverse with partial pivoting; `None` if singular.
fn invert(a: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let piv_row = (c..k).max_by(|&i, &j| a[i * k + c].abs().total_cmp(&a[j * k + c].abs()))?;
        let piv = a[piv_row * k + c];
        if piv.abs() < 1e-11 {
            return None;
        }
        if piv_row != c {
            for col in 0..k {
                a.swap(c * k + col, piv_row * k + col);
                inv.swap(c * k + col, piv_row * k + col);
            }
        }
        for col in 0..k {
            a[c * k + col] /= piv;
            inv[c * k + col] /= piv;
        }
        for i in 0..k {
            if i == c {
                continue;
            }
            let f = a[i * k + c];
            if f != 0.0 {
                for col in 0..k {
                    a[i * k + col] -= f * a[c * k + col];
                    inv[i * k + col] -= f * inv[c * k + col];
                }
            }
        }
    }
    Some(inv)
}
