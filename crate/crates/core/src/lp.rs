//! Dense two-phase simplex for the small linear programs used throughout
//! the crate.
//!
//! Problems are brought to the standard form `min c.x, Ax = b, x >= 0, b >= 0`
//! by shifting/splitting variables and adding slack, surplus and artificial
//! columns. Pricing uses Dantzig's rule and falls back to Bland's rule after
//! a streak of degenerate pivots. Once an optimal basis is found the basic
//! solution and the dual prices are recomputed from the original data with an
//! LU factorization, which keeps the reported point accurate to roundoff.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bounds {
    pub const NONNEGATIVE: Bounds = Bounds { lower: Some(0.0), upper: None };
    pub const FREE: Bounds = Bounds { lower: None, upper: None };
}

/// `optimize objective . x` subject to linear constraints and bounds.
/// Variables default to `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { sense, objective, constraints: Vec::new(), bounds: vec![Bounds::NONNEGATIVE; n] }
    }

    /// Pure feasibility problem over `num_vars` variables.
    pub fn feasibility(num_vars: usize) -> Self {
        LinearProgram::new(Sense::Min, vec![0.0; num_vars])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Le, rhs)
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Ge, rhs)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Eq, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) -> &mut Self {
        self.bounds[var] = bounds;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, Bounds::FREE)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint {r} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("constraint {r} is not finite")));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let bad = |v: Option<f64>| v.is_some_and(|x| !x.is_finite());
            if bad(b.lower) || bad(b.upper) {
                return Err(LpError::Malformed(format!("bound of variable {j} is not finite")));
            }
            if let (Some(l), Some(u)) = (b.lower, b.upper) {
                if l > u {
                    return Err(LpError::Malformed(format!("variable {j} has lower bound {l} > upper {u}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex iteration limit ({0}) exceeded")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Shadow prices `d(optimal value) / d(rhs)`, one per constraint.
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal(_) => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub degeneracy_streak: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-8,
            pivot_tol: 1e-11,
            max_iterations: 50_000,
            degeneracy_streak: 25,
        }
    }
}

/// Solves `lp` with default tolerances.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let std = StandardForm::build(lp);
    let mut tab = Tableau::new(&std);
    let mut iterations = 0usize;

    // phase one: drive the artificials to zero
    if tab.num_artificial > 0 {
        let mut cost = vec![0.0; tab.cols];
        for c in tab.art_start..tab.cols {
            cost[c] = 1.0;
        }
        tab.set_objective(&cost);
        match tab.optimize(opts, &mut iterations, true)? {
            PhaseResult::Optimal => {}
            PhaseResult::Unbounded => {
                return Err(LpError::Numerical("phase one reported unbounded".into()));
            }
        }
        let scale = 1.0 + std.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tab.objective_value() > opts.feasibility_tol * scale {
            return Ok(LpOutcome::Infeasible);
        }
        tab.expel_artificials(opts);
    }

    // phase two
    let mut cost = vec![0.0; tab.cols];
    cost[..std.c.len()].copy_from_slice(&std.c);
    tab.set_objective(&cost);
    match tab.optimize(opts, &mut iterations, false)? {
        PhaseResult::Unbounded => return Ok(LpOutcome::Unbounded),
        PhaseResult::Optimal => {}
    }

    let solution = std.recover(lp, &tab, opts)?;
    Ok(LpOutcome::Optimal(solution))
}

/// Outcome of a pure feasibility question.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Phase-one check of the constraints and bounds of `lp`; the objective is
/// ignored.
pub fn check_feasibility(lp: &LinearProgram) -> Result<Feasibility, LpError> {
    let mut plain = lp.clone();
    plain.objective = vec![0.0; lp.num_vars()];
    plain.sense = Sense::Min;
    match solve_lp(&plain)? {
        LpOutcome::Optimal(s) => Ok(Feasibility::Feasible(s.x)),
        LpOutcome::Infeasible => Ok(Feasibility::Infeasible),
        LpOutcome::Unbounded => Err(LpError::Numerical("zero objective reported unbounded".into())),
    }
}

/// `x_j = offset + sum coef * x'_col` for each original variable.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

#[derive(Debug)]
struct StandardForm {
    // structural columns only; slacks/artificials are added by the tableau
    a: Vec<Vec<f64>>,
    relation: Vec<Relation>,
    b: Vec<f64>,
    c: Vec<f64>,
    maps: Vec<VarMap>,
    // for each std row: Some((original constraint, sign)) or None for bound rows
    origin: Vec<Option<(usize, f64)>>,
    objective_sign: f64,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut ncols = 0usize;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for b in &lp.bounds {
            let map = match (b.lower, b.upper) {
                (Some(l), None) => {
                    ncols += 1;
                    VarMap { offset: l, terms: vec![(ncols - 1, 1.0)] }
                }
                (Some(l), Some(u)) => {
                    ncols += 1;
                    bound_rows.push((ncols - 1, u - l));
                    VarMap { offset: l, terms: vec![(ncols - 1, 1.0)] }
                }
                (None, Some(u)) => {
                    ncols += 1;
                    VarMap { offset: u, terms: vec![(ncols - 1, -1.0)] }
                }
                (None, None) => {
                    ncols += 2;
                    VarMap { offset: 0.0, terms: vec![(ncols - 2, 1.0), (ncols - 1, -1.0)] }
                }
            };
            maps.push(map);
        }

        let objective_sign = match lp.sense {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        };
        let mut c = vec![0.0; ncols];
        for (j, cj) in lp.objective.iter().enumerate() {
            for &(col, coef) in &maps[j].terms {
                c[col] += objective_sign * cj * coef;
            }
        }

        let mut a = Vec::new();
        let mut relation = Vec::new();
        let mut b = Vec::new();
        let mut origin = Vec::new();
        for (r, con) in lp.constraints.iter().enumerate() {
            let mut row = vec![0.0; ncols];
            let mut rhs = con.rhs;
            for (j, aj) in con.coeffs.iter().enumerate() {
                if *aj == 0.0 {
                    continue;
                }
                rhs -= aj * maps[j].offset;
                for &(col, coef) in &maps[j].terms {
                    row[col] += aj * coef;
                }
            }
            let (row, rel, rhs, sign) = normalize_sign(row, con.relation, rhs);
            a.push(row);
            relation.push(rel);
            b.push(rhs);
            origin.push(Some((r, sign)));
        }
        for (col, width) in bound_rows {
            let mut row = vec![0.0; ncols];
            row[col] = 1.0;
            // width >= 0 by validation
            a.push(row);
            relation.push(Relation::Le);
            b.push(width);
            origin.push(None);
        }
        StandardForm { a, relation, b, c, maps, origin, objective_sign }
    }

    fn recover(&self, lp: &LinearProgram, tab: &Tableau, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
        // Rebuild the basis from the original standard-form columns and
        // solve for the basic values and the duals.
        let rows: Vec<usize> = (0..tab.rows).filter(|&r| tab.active[r]).collect();
        let m = rows.len();
        let total_cols = tab.cols;
        let mut x_std = vec![0.0; total_cols];
        let mut y_std = vec![0.0; tab.rows];
        if m > 0 {
            let basis: Vec<usize> = rows.iter().map(|&r| tab.basis[r]).collect();
            let column = |col: usize, row: usize| -> f64 { tab.original_entry(self, row, col) };
            let bmat = DMatrix::from_fn(m, m, |i, k| column(basis[k], rows[i]));
            let rhs = DVector::from_iterator(m, rows.iter().map(|&r| self.b[r]));
            let lu = bmat.clone().lu();
            let xb = lu
                .solve(&rhs)
                .ok_or_else(|| LpError::Numerical("singular final basis".into()))?;
            for (k, &col) in basis.iter().enumerate() {
                x_std[col] = xb[k];
            }
            let cb = DVector::from_iterator(
                m,
                basis.iter().map(|&col| if col < self.c.len() { self.c[col] } else { 0.0 }),
            );
            let yb = bmat
                .transpose()
                .lu()
                .solve(&cb)
                .ok_or_else(|| LpError::Numerical("singular final basis".into()))?;
            for (i, &r) in rows.iter().enumerate() {
                y_std[r] = yb[i];
            }
        }
        for v in x_std.iter_mut() {
            if *v < 0.0 {
                if *v < -opts.feasibility_tol * 10.0 {
                    return Err(LpError::Numerical(format!("basic variable value {v} is negative")));
                }
                *v = 0.0;
            }
        }

        let x: Vec<f64> = self
            .maps
            .iter()
            .map(|map| map.offset + map.terms.iter().map(|&(col, coef)| coef * x_std[col]).sum::<f64>())
            .collect();
        let mut duals = vec![0.0; lp.constraints.len()];
        for (row, origin) in self.origin.iter().enumerate() {
            if let Some((r, sign)) = origin {
                duals[*r] = self.objective_sign * sign * y_std[row];
            }
        }
        let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

        // certify primal feasibility against the caller's data
        for (r, con) in lp.constraints.iter().enumerate() {
            let lhs: f64 = con.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
            let scale = 1.0 + con.rhs.abs().max(lhs.abs());
            let tol = opts.feasibility_tol * scale;
            let ok = match con.relation {
                Relation::Le => lhs <= con.rhs + tol,
                Relation::Ge => lhs >= con.rhs - tol,
                Relation::Eq => (lhs - con.rhs).abs() <= tol,
            };
            if !ok {
                return Err(LpError::Numerical(format!(
                    "constraint {r} violated at reported optimum: lhs {lhs}, rhs {}",
                    con.rhs
                )));
            }
        }
        Ok(LpSolution { x, objective_value, duals })
    }
}

fn normalize_sign(row: Vec<f64>, rel: Relation, rhs: f64) -> (Vec<f64>, Relation, f64, f64) {
    if rhs >= 0.0 {
        return (row, rel, rhs, 1.0);
    }
    let flipped = match rel {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    };
    (row.into_iter().map(|v| -v).collect(), flipped, -rhs, -1.0)
}

enum PhaseResult {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    structural: usize,
    // slack (+1 for Le, -1 for Ge) per row
    slack_col: Vec<Option<(usize, f64)>>,
    art_start: usize,
    art_col: Vec<Option<usize>>,
    num_artificial: usize,
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    obj: Vec<f64>,
    obj_rhs: f64,
    basis: Vec<usize>,
    active: Vec<bool>,
    std_a: Vec<Vec<f64>>,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let rows = std.a.len();
        let structural = std.c.len();
        let mut cols = structural;
        let mut slack_col = vec![None; rows];
        for (r, rel) in std.relation.iter().enumerate() {
            match rel {
                Relation::Le => {
                    slack_col[r] = Some((cols, 1.0));
                    cols += 1;
                }
                Relation::Ge => {
                    slack_col[r] = Some((cols, -1.0));
                    cols += 1;
                }
                Relation::Eq => {}
            }
        }
        let art_start = cols;
        let mut art_col = vec![None; rows];
        for (r, rel) in std.relation.iter().enumerate() {
            if *rel != Relation::Le {
                art_col[r] = Some(cols);
                cols += 1;
            }
        }
        let num_artificial = cols - art_start;
        let mut t = vec![vec![0.0; cols]; rows];
        let mut basis = vec![0; rows];
        for r in 0..rows {
            t[r][..structural].copy_from_slice(&std.a[r]);
            if let Some((c, s)) = slack_col[r] {
                t[r][c] = s;
            }
            match art_col[r] {
                Some(c) => {
                    t[r][c] = 1.0;
                    basis[r] = c;
                }
                None => basis[r] = slack_col[r].expect("Le row has a slack").0,
            }
        }
        Tableau {
            rows,
            cols,
            structural,
            slack_col,
            art_start,
            art_col,
            num_artificial,
            t,
            rhs: std.b.clone(),
            obj: vec![0.0; cols],
            obj_rhs: 0.0,
            basis,
            active: vec![true; rows],
            std_a: std.a.clone(),
        }
    }

    fn original_entry(&self, _std: &StandardForm, row: usize, col: usize) -> f64 {
        if col < self.structural {
            return self.std_a[row][col];
        }
        if let Some((c, s)) = self.slack_col[row] {
            if c == col {
                return s;
            }
        }
        if self.art_col[row] == Some(col) {
            return 1.0;
        }
        0.0
    }

    /// Installs cost vector `cost` and prices out the basic columns.
    fn set_objective(&mut self, cost: &[f64]) {
        self.obj = cost.to_vec();
        self.obj_rhs = 0.0;
        for r in 0..self.rows {
            if !self.active[r] {
                continue;
            }
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..self.cols {
                    self.obj[c] -= cb * self.t[r][c];
                }
                self.obj_rhs -= cb * self.rhs[r];
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.obj_rhs
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.t[pr][pc];
        for v in self.t[pr].iter_mut() {
            *v /= piv;
        }
        self.rhs[pr] /= piv;
        self.t[pr][pc] = 1.0;
        let prow = self.t[pr].clone();
        let prhs = self.rhs[pr];
        for r in 0..self.rows {
            if r == pr || !self.active[r] {
                continue;
            }
            let f = self.t[r][pc];
            if f != 0.0 {
                for (v, p) in self.t[r].iter_mut().zip(&prow) {
                    *v -= f * p;
                }
                self.t[r][pc] = 0.0;
                self.rhs[r] -= f * prhs;
                if self.rhs[r] < 0.0 && self.rhs[r] > -1e-12 {
                    self.rhs[r] = 0.0;
                }
            }
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.obj[pc] = 0.0;
            self.obj_rhs -= f * prhs;
        }
        self.basis[pr] = pc;
    }

    fn optimize(&mut self, opts: &SimplexOptions, iterations: &mut usize, phase_one: bool) -> Result<PhaseResult, LpError> {
        let limit = if phase_one { self.cols } else { self.art_start };
        let mut streak = 0usize;
        loop {
            let bland = streak >= opts.degeneracy_streak;
            let entering = if bland {
                (0..limit).find(|&c| self.obj[c] < -opts.optimality_tol)
            } else {
                let mut best = None;
                let mut best_val = -opts.optimality_tol;
                for c in 0..limit {
                    if self.obj[c] < best_val {
                        best_val = self.obj[c];
                        best = Some(c);
                    }
                }
                best
            };
            let Some(pc) = entering else {
                return Ok(PhaseResult::Optimal);
            };

            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.rows {
                if !self.active[r] {
                    continue;
                }
                let a = self.t[r][pc];
                if a <= opts.pivot_tol {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                match leave {
                    None => {
                        leave = Some(r);
                        best_ratio = ratio;
                    }
                    Some(l) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie {
                            leave = Some(r);
                            best_ratio = ratio;
                        } else if tie {
                            let better = if bland {
                                self.basis[r] < self.basis[l]
                            } else {
                                a > self.t[l][pc]
                            };
                            if better {
                                leave = Some(r);
                                best_ratio = best_ratio.min(ratio);
                            }
                        }
                    }
                }
            }
            let Some(pr) = leave else {
                return Ok(PhaseResult::Unbounded);
            };
            if best_ratio <= 1e-12 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(pr, pc);
            *iterations += 1;
            if *iterations > opts.max_iterations {
                return Err(LpError::IterationLimit(opts.max_iterations));
            }
        }
    }

    /// Pivots basic artificials out after phase one; rows where that is
    /// impossible are redundant and get deactivated.
    fn expel_artificials(&mut self, opts: &SimplexOptions) {
        for r in 0..self.rows {
            if !self.active[r] || self.basis[r] < self.art_start {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = opts.pivot_tol.max(1e-9);
            for c in 0..self.art_start {
                let a = self.t[r][c].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(c);
                }
            }
            match best {
                Some(c) => self.pivot(r, c),
                None => self.active[r] = false,
            }
        }
    }
}
