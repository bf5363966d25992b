//! A small dense linear-program solver.
//!
//! Minimizes or maximizes a linear objective subject to linear equalities,
//! `<=` inequalities, and per-variable box bounds. Two-phase primal simplex
//! on a dense tableau with Bland's rule, so it cannot cycle. Problem sizes
//! here are a handful of variables (one per cross-classification cell), so
//! robustness beats speed throughout.

use crate::error::{Error, Result};

/// `minimize/maximize objective · x` subject to
/// `eq_rows: a · x = rhs`, `ineq_rows: a · x <= rhs`, and `box` bounds per
/// variable. Boxes default to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    eq_rows: Vec<(Vec<f64>, f64)>,
    ineq_rows: Vec<(Vec<f64>, f64)>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
            bounds: vec![(0.0, 1.0); n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_rows(&self) -> &[(Vec<f64>, f64)] {
        &self.eq_rows
    }

    pub fn ineq_rows(&self) -> &[(Vec<f64>, f64)] {
        &self.ineq_rows
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_objective(&mut self, coeffs: Vec<f64>) -> Result<()> {
        self.check_len(&coeffs)?;
        self.objective = coeffs;
        Ok(())
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_len(&coeffs)?;
        self.eq_rows.push((coeffs, rhs));
        Ok(())
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_len(&coeffs)?;
        self.ineq_rows.push((coeffs, rhs));
        Ok(())
    }

    /// Box a single variable; `hi` may be `f64::INFINITY`.
    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> Result<()> {
        if var >= self.n_vars {
            return Err(Error::InvalidArgument(format!(
                "variable {var} out of range"
            )));
        }
        if !lo.is_finite() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "invalid bounds [{lo}, {hi}] for variable {var}"
            )));
        }
        self.bounds[var] = (lo, hi);
        Ok(())
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.n_vars {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has {} entries, expected {}",
                coeffs.len(),
                self.n_vars
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn optimal_value(&self) -> Option<f64> {
        match self {
            LpSolution::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// A point violating constraints by more than this is not feasible.
    pub feas_tol: f64,
    /// Reduced costs above `-opt_tol` are treated as nonnegative.
    pub opt_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            opt_tol: 1e-8,
            max_iterations: 10_000,
        }
    }
}

pub fn solve_min(lp: &LinearProgram) -> Result<LpSolution> {
    solve_min_with(lp, &SolverOptions::default())
}

pub fn solve_max(lp: &LinearProgram) -> Result<LpSolution> {
    solve_max_with(lp, &SolverOptions::default())
}

pub fn solve_min_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    Simplex::build(lp, false, opts).solve()
}

pub fn solve_max_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    // The reported value is always the original objective at the optimal
    // point, so no sign fixup is needed here.
    Simplex::build(lp, true, opts).solve()
}

/// Entries smaller than this cannot serve as pivots.
const PIVOT_TOL: f64 = 1e-11;

struct Simplex<'a> {
    lp: &'a LinearProgram,
    opts: SolverOptions,
    negate_objective: bool,
    /// Row-major constraint matrix over all columns (structural, slack,
    /// artificial), kept basis-canonical.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    n_structural: usize,
    n_slack: usize,
    n_art: usize,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    /// Shift variables to start at their lower bound, turn box uppers into
    /// rows, add slacks for inequalities and artificials wherever no natural
    /// basic column exists.
    fn build(lp: &'a LinearProgram, negate_objective: bool, opts: &SolverOptions) -> Self {
        let n = lp.n_vars;
        let lows: Vec<f64> = lp.bounds.iter().map(|(lo, _)| *lo).collect();

        // (coeffs over shifted vars, rhs, is_inequality)
        let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
        for (coeffs, rhs) in &lp.eq_rows {
            let shift: f64 = coeffs.iter().zip(&lows).map(|(c, l)| c * l).sum();
            rows.push((coeffs.clone(), rhs - shift, false));
        }
        for (coeffs, rhs) in &lp.ineq_rows {
            let shift: f64 = coeffs.iter().zip(&lows).map(|(c, l)| c * l).sum();
            rows.push((coeffs.clone(), rhs - shift, true));
        }
        for (j, (lo, hi)) in lp.bounds.iter().enumerate() {
            if hi.is_finite() {
                let mut coeffs = vec![0.0; n];
                coeffs[j] = 1.0;
                rows.push((coeffs, hi - lo, true));
            }
        }

        let m = rows.len();
        let n_slack = rows.iter().filter(|(_, _, ineq)| *ineq).count();
        // Column layout: structural | slack | artificial.
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut slack_of_row: Vec<Option<usize>> = Vec::with_capacity(m);
        let mut needs_art: Vec<bool> = Vec::with_capacity(m);
        let mut slack_idx = 0usize;
        for (coeffs, rhs, ineq) in rows {
            let negate = rhs < 0.0;
            let sign = if negate { -1.0 } else { 1.0 };
            let mut row = vec![0.0; n + n_slack];
            for (j, c) in coeffs.iter().enumerate() {
                row[j] = sign * c;
            }
            if ineq {
                row[n + slack_idx] = sign;
                slack_of_row.push(Some(n + slack_idx));
                slack_idx += 1;
            } else {
                slack_of_row.push(None);
            }
            b.push(sign * rhs);
            // A non-negated inequality has its slack as a ready-made basic
            // column; everything else needs an artificial.
            needs_art.push(!(ineq && !negate));
            a.push(row);
        }

        let n_art = needs_art.iter().filter(|x| **x).count();
        for row in a.iter_mut() {
            row.extend(std::iter::repeat_n(0.0, n_art));
        }
        let mut basis = vec![usize::MAX; m];
        let mut art_idx = 0usize;
        for i in 0..m {
            if needs_art[i] {
                let col = n + n_slack + art_idx;
                a[i][col] = 1.0;
                basis[i] = col;
                art_idx += 1;
            } else {
                basis[i] = slack_of_row[i].expect("inequality rows have slacks");
            }
        }

        Self {
            lp,
            opts: *opts,
            negate_objective,
            a,
            b,
            basis,
            n_structural: n,
            n_slack,
            n_art,
            iterations: 0,
        }
    }

    fn n_cols(&self) -> usize {
        self.n_structural + self.n_slack + self.n_art
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n_structural + self.n_slack
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64], obj: &mut f64) {
        let piv = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= piv;
        }
        self.b[row] /= piv;
        let n_cols = self.n_cols();
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n_cols {
                self.a[i][j] -= factor * self.a[row][j];
            }
            self.a[i][col] = 0.0;
            self.b[i] -= factor * self.b[row];
        }
        let factor = cost[col];
        if factor != 0.0 {
            for j in 0..n_cols {
                cost[j] -= factor * self.a[row][j];
            }
            cost[col] = 0.0;
            // The step length is the normalized rhs of the pivot row.
            *obj += factor * self.b[row];
        }
        self.basis[row] = col;
    }

    /// Run simplex iterations until optimal, unbounded, or the iteration cap.
    fn iterate(
        &mut self,
        cost: &mut [f64],
        obj: &mut f64,
        banned: &dyn Fn(usize) -> bool,
    ) -> Result<Option<LpSolution>> {
        loop {
            self.iterations += 1;
            if self.iterations > self.opts.max_iterations {
                return Err(Error::SolverStalled {
                    iterations: self.opts.max_iterations,
                });
            }
            // Bland: smallest improving column index.
            let entering = (0..self.n_cols()).find(|&j| !banned(j) && cost[j] < -self.opts.opt_tol);
            let Some(col) = entering else {
                return Ok(None); // optimal for this phase
            };
            // Ratio test, ties broken by smallest basic variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][col];
                if aij <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.b[i] / aij;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((best_i, best_r)) => {
                        if ratio < best_r - PIVOT_TOL
                            || ((ratio - best_r).abs() <= PIVOT_TOL
                                && self.basis[i] < self.basis[best_i])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(Some(LpSolution::Unbounded));
            };
            self.pivot(row, col, cost, obj);
        }
    }

    fn solve(mut self) -> Result<LpSolution> {
        // Phase 1: drive the artificial variables to zero.
        if self.n_art > 0 {
            let mut cost = vec![0.0; self.n_cols()];
            for j in self.n_structural + self.n_slack..self.n_cols() {
                cost[j] = 1.0;
            }
            let mut obj = 0.0;
            // Reduce against the starting basis (artificials cost 1).
            let rows: Vec<usize> = (0..self.a.len())
                .filter(|&i| self.is_artificial(self.basis[i]))
                .collect();
            for &i in &rows {
                for j in 0..self.n_cols() {
                    cost[j] -= self.a[i][j];
                }
                obj += self.b[i];
            }
            if let Some(sol) = self.iterate(&mut cost, &mut obj, &|_| false)? {
                // Phase 1 is bounded below by zero, so this cannot happen;
                // treat it as a stall if it somehow does.
                let _ = sol;
                return Err(Error::SolverStalled {
                    iterations: self.iterations,
                });
            }
            if obj > self.opts.feas_tol {
                return Ok(LpSolution::Infeasible);
            }
            self.evict_artificials();
        }

        // Phase 2: the real objective over shifted variables.
        let sign = if self.negate_objective { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; self.n_cols()];
        for j in 0..self.n_structural {
            cost[j] = sign * self.lp.objective[j];
        }
        let mut obj = 0.0;
        for i in 0..self.a.len() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                obj += cb * self.b[i];
            }
        }
        // Make reduced costs of basic columns zero.
        for i in 0..self.a.len() {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = self.a[i].clone();
            for j in 0..self.n_cols() {
                cost[j] -= cb * row[j];
            }
        }
        let art_start = self.n_structural + self.n_slack;
        if let Some(sol) = self.iterate(&mut cost, &mut obj, &|j| j >= art_start)? {
            return Ok(sol);
        }

        // Read the structural solution and report in original coordinates.
        let mut x: Vec<f64> = self.lp.bounds.iter().map(|(lo, _)| *lo).collect();
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.n_structural {
                x[bv] += self.b[i];
            }
        }
        let value: f64 = self.lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution::Optimal { value, point: x })
    }

    /// After phase 1, swap any artificial still in the basis (at level zero)
    /// for a real column, dropping rows that turn out redundant.
    fn evict_artificials(&mut self) {
        let art_start = self.n_structural + self.n_slack;
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] < art_start {
                i += 1;
                continue;
            }
            let col = (0..art_start)
                .find(|&j| self.a[i][j] > PIVOT_TOL)
                .or_else(|| (0..art_start).find(|&j| self.a[i][j].abs() > PIVOT_TOL));
            match col {
                Some(j) => {
                    let mut dummy_cost = vec![0.0; self.n_cols()];
                    let mut dummy_obj = 0.0;
                    self.pivot(i, j, &mut dummy_cost, &mut dummy_obj);
                    i += 1;
                }
                None => {
                    // Redundant constraint.
                    self.a.remove(i);
                    self.b.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
