//! Exact linear programming over arbitrary-precision rationals.
//!
//! A small dense two-phase simplex, specialised for the desk-scale programs
//! this crate builds. Outline:
//!
//! 1. Rewrite the program in standard computational form `min c'y, Ay = b,
//!    y >= 0`: shift variables by their finite lower bound (or negate against
//!    the upper bound, or split free variables), turn finite upper bounds
//!    into explicit rows, add slack/surplus columns, and normalise `b >= 0`.
//! 2. Phase 1 minimises the sum of one artificial variable per row; a
//!    positive optimum means infeasible, otherwise leftover basic
//!    artificials are pivoted out and redundant rows dropped.
//! 3. Phase 2 optimises the real objective. Both phases pivot by Bland's
//!    rule (lowest eligible column, ties in the ratio test toward the lowest
//!    basic variable), so cycling is impossible and runs are deterministic.
//! 4. The basic feasible solution is mapped back to the original variables.
//!    Because the transform is an affine bijection between the two feasible
//!    sets, basic solutions correspond to extreme points of the original
//!    polyhedron; an exact rank computation over the active constraints
//!    audits this and fills `is_vertex`.
//!
//! All arithmetic is rational and exact; there is no tolerance anywhere.

use crate::rational::{is_strictly_fractional, rank, Rational};
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A linear program in original (row) form. The objective is maximised.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    /// Per-variable `(lower, upper)`; `None` means unbounded on that side.
    pub bounds: Vec<(Option<Rational>, Option<Rational>)>,
}

impl LinearProgram {
    /// Program with `num_vars` variables, zero objective, no constraints,
    /// and free bounds.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![(None, None); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(&mut self, coeffs: Vec<Rational>) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars());
        self.objective = coeffs;
        self
    }

    pub fn subject_to(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars());
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn bound_all(&mut self, lower: Option<Rational>, upper: Option<Rational>) -> &mut Self {
        for b in self.bounds.iter_mut() {
            *b = (lower.clone(), upper.clone());
        }
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }
}

/// A constraint or bound active at a returned point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TightConstraint {
    /// Index into `LinearProgram::constraints`.
    Row(usize),
    /// `x[var] == lower`.
    Lower(usize),
    /// `x[var] == upper`.
    Upper(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicSolution {
    pub point: Vec<Rational>,
    pub objective_value: Rational,
    pub tight_set: Vec<TightConstraint>,
    /// True when the active constraints have full column rank at `point`.
    pub is_vertex: bool,
}

impl BasicSolution {
    /// Number of coordinates strictly between 0 and 1.
    pub fn fractional_coordinates(&self) -> usize {
        self.point.iter().filter(|x| is_strictly_fractional(x)).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    /// Pivot-count safety valve; with Bland's rule this indicates a bug.
    IterationLimit,
    Shape(String),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "linear program is infeasible"),
            LpError::Unbounded => write!(f, "linear program is unbounded"),
            LpError::IterationLimit => write!(f, "simplex iteration limit exceeded"),
            LpError::Shape(s) => write!(f, "malformed linear program: {s}"),
        }
    }
}

impl std::error::Error for LpError {}

const MAX_PIVOTS: u64 = 1_000_000;

/// How an original variable maps to standard-form columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// `x = y[col] + offset`
    Shifted { col: usize, offset: Rational },
    /// `x = offset - y[col]`
    Negated { col: usize, offset: Rational },
    /// `x = y[pos] - y[neg]`
    Split { pos: usize, neg: usize },
}

/// Maximises the objective and returns an optimal basic solution, which is
/// an extreme point of the feasible region whenever the region has one.
pub fn solve_to_vertex(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    validate(lp)?;
    let n = lp.num_vars();

    // 1. variable transforms
    let mut var_map = Vec::with_capacity(n);
    let mut num_y = 0usize;
    // upper-bound rows for shifted variables: (y-column, bound)
    let mut upper_rows: Vec<(usize, Rational)> = Vec::new();
    for (lower, upper) in &lp.bounds {
        match (lower, upper) {
            (Some(lo), hi) => {
                if let Some(hi) = hi {
                    if hi < lo {
                        return Err(LpError::Infeasible);
                    }
                    upper_rows.push((num_y, hi - lo));
                }
                var_map.push(VarMap::Shifted { col: num_y, offset: lo.clone() });
                num_y += 1;
            }
            (None, Some(hi)) => {
                var_map.push(VarMap::Negated { col: num_y, offset: hi.clone() });
                num_y += 1;
            }
            (None, None) => {
                var_map.push(VarMap::Split { pos: num_y, neg: num_y + 1 });
                num_y += 2;
            }
        }
    }

    // 2. rows in y-space: original constraints first, then upper-bound rows
    struct Row {
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(lp.constraints.len() + upper_rows.len());
    for con in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); num_y];
        let mut rhs = con.rhs.clone();
        for (x, coef) in con.coeffs.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            match &var_map[x] {
                VarMap::Shifted { col, offset } => {
                    coeffs[*col] += coef;
                    rhs -= coef * offset;
                }
                VarMap::Negated { col, offset } => {
                    coeffs[*col] -= coef;
                    rhs -= coef * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += coef;
                    coeffs[*neg] -= coef;
                }
            }
        }
        rows.push(Row { coeffs, relation: con.relation, rhs });
    }
    for (col, bound) in &upper_rows {
        let mut coeffs = vec![Rational::zero(); num_y];
        coeffs[*col] = Rational::one();
        rows.push(Row { coeffs, relation: Relation::Le, rhs: bound.clone() });
    }

    // 3. slacks, b >= 0 normalisation, artificials
    let num_rows = rows.len();
    let num_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let art_start = num_y + num_slack;
    let total_cols = art_start + num_rows;

    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(num_rows);
    let mut b: Vec<Rational> = Vec::with_capacity(num_rows);
    let mut basis: Vec<usize> = Vec::with_capacity(num_rows);
    let mut slack_idx = num_y;
    for (r, row) in rows.iter().enumerate() {
        let mut full = vec![Rational::zero(); total_cols];
        full[..num_y].clone_from_slice(&row.coeffs);
        match row.relation {
            Relation::Le => {
                full[slack_idx] = Rational::one();
                slack_idx += 1;
            }
            Relation::Ge => {
                full[slack_idx] = -Rational::one();
                slack_idx += 1;
            }
            Relation::Eq => {}
        }
        let mut rhs = row.rhs.clone();
        if rhs.is_negative() {
            for v in full.iter_mut() {
                *v = -v.clone();
            }
            rhs = -rhs;
        }
        full[art_start + r] = Rational::one();
        a.push(full);
        b.push(rhs);
        basis.push(art_start + r);
    }

    let mut pivots = 0u64;

    // 4. phase 1: minimise the artificial sum
    let mut phase1_cost = vec![Rational::zero(); total_cols];
    for col in art_start..total_cols {
        phase1_cost[col] = Rational::one();
    }
    let mut cost_row = reduced_costs(&phase1_cost, &a, &b, &basis);
    simplex_loop(&mut a, &mut b, &mut basis, &mut cost_row, total_cols, &mut pivots, |_| false)?;
    // cost_row's last entry holds -z
    if cost_row[total_cols].is_negative() {
        return Err(LpError::Infeasible);
    }

    // 5. drive leftover artificials out of the basis; drop redundant rows
    let mut r = 0;
    while r < a.len() {
        if basis[r] >= art_start {
            let pivot_col = (0..art_start).find(|&j| !a[r][j].is_zero());
            match pivot_col {
                Some(j) => {
                    pivot(&mut a, &mut b, &mut basis, &mut cost_row, r, j);
                    r += 1;
                }
                None => {
                    a.remove(r);
                    b.remove(r);
                    basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }

    // 6. phase 2 on the real objective (min of the negated maximise form)
    let mut phase2_cost = vec![Rational::zero(); total_cols];
    for (x, coef) in lp.objective.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        match &var_map[x] {
            VarMap::Shifted { col, .. } => phase2_cost[*col] -= coef,
            VarMap::Negated { col, .. } => phase2_cost[*col] += coef,
            VarMap::Split { pos, neg } => {
                phase2_cost[*pos] -= coef;
                phase2_cost[*neg] += coef;
            }
        }
    }
    let mut cost_row = reduced_costs(&phase2_cost, &a, &b, &basis);
    simplex_loop(&mut a, &mut b, &mut basis, &mut cost_row, total_cols, &mut pivots, |col| {
        col >= art_start
    })?;

    // 7. read off y, map back to x
    let mut y = vec![Rational::zero(); total_cols];
    for (r, &var) in basis.iter().enumerate() {
        y[var] = b[r].clone();
    }
    let point: Vec<Rational> = var_map
        .iter()
        .map(|vm| match vm {
            VarMap::Shifted { col, offset } => &y[*col] + offset,
            VarMap::Negated { col, offset } => offset - &y[*col],
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        })
        .collect();

    let objective_value: Rational = lp
        .objective
        .iter()
        .zip(&point)
        .map(|(c, x)| c * x)
        .fold(Rational::zero(), |acc, t| acc + t);

    // 8. tight set and exact vertex audit
    let mut tight_set = Vec::new();
    let mut active_rows: Vec<Vec<Rational>> = Vec::new();
    for (idx, con) in lp.constraints.iter().enumerate() {
        let lhs: Rational = con
            .coeffs
            .iter()
            .zip(&point)
            .map(|(c, x)| c * x)
            .fold(Rational::zero(), |acc, t| acc + t);
        let ok = match con.relation {
            Relation::Le => lhs <= con.rhs,
            Relation::Ge => lhs >= con.rhs,
            Relation::Eq => lhs == con.rhs,
        };
        debug_assert!(ok, "simplex returned an infeasible point");
        if lhs == con.rhs {
            tight_set.push(TightConstraint::Row(idx));
            active_rows.push(con.coeffs.clone());
        }
    }
    for (x, (lower, upper)) in lp.bounds.iter().enumerate() {
        if let Some(lo) = lower {
            debug_assert!(&point[x] >= lo);
            if &point[x] == lo {
                tight_set.push(TightConstraint::Lower(x));
                active_rows.push(unit_row(n, x));
            }
        }
        if let Some(hi) = upper {
            debug_assert!(&point[x] <= hi);
            if &point[x] == hi {
                tight_set.push(TightConstraint::Upper(x));
                active_rows.push(unit_row(n, x));
            }
        }
    }
    let is_vertex = rank(&active_rows) == n;

    Ok(BasicSolution { point, objective_value, tight_set, is_vertex })
}

/// Returns any extreme point of the feasible region (the objective is
/// ignored). The caller is responsible for the region being bounded; with a
/// zero objective the solve stops at the first basic feasible solution.
pub fn find_vertex(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    let mut zeroed = lp.clone();
    zeroed.objective = vec![Rational::zero(); lp.num_vars()];
    solve_to_vertex(&zeroed)
}

fn validate(lp: &LinearProgram) -> Result<(), LpError> {
    let n = lp.num_vars();
    if lp.bounds.len() != n {
        return Err(LpError::Shape(format!(
            "{} bounds for {} variables",
            lp.bounds.len(),
            n
        )));
    }
    for (i, con) in lp.constraints.iter().enumerate() {
        if con.coeffs.len() != n {
            return Err(LpError::Shape(format!(
                "constraint {i} has {} coefficients for {} variables",
                con.coeffs.len(),
                n
            )));
        }
    }
    Ok(())
}

fn unit_row(n: usize, var: usize) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); n];
    row[var] = Rational::one();
    row
}

/// Reduced-cost row (length `total_cols + 1`, last entry `-z`) for cost
/// vector `cost` under the current basis.
fn reduced_costs(cost: &[Rational], a: &[Vec<Rational>], b: &[Rational], basis: &[usize]) -> Vec<Rational> {
    let total_cols = cost.len();
    let mut row: Vec<Rational> = cost.to_vec();
    row.push(Rational::zero());
    for (r, &var) in basis.iter().enumerate() {
        if cost[var].is_zero() {
            continue;
        }
        let f = cost[var].clone();
        for j in 0..total_cols {
            let sub = &f * &a[r][j];
            row[j] -= sub;
        }
        let sub = &f * &b[r];
        row[total_cols] -= sub;
    }
    row
}

/// Runs Bland-rule pivots until optimal. `excluded` marks columns that may
/// not enter (artificials during phase 2).
fn simplex_loop(
    a: &mut Vec<Vec<Rational>>,
    b: &mut Vec<Rational>,
    basis: &mut Vec<usize>,
    cost_row: &mut Vec<Rational>,
    total_cols: usize,
    pivots: &mut u64,
    excluded: impl Fn(usize) -> bool,
) -> Result<(), LpError> {
    loop {
        // Bland: lowest-index column with a negative reduced cost
        let entering = (0..total_cols).find(|&j| !excluded(j) && cost_row[j].is_negative());
        let Some(entering) = entering else {
            return Ok(());
        };
        // ratio test; ties toward the lowest basic variable index
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..a.len() {
            if a[r][entering].is_positive() {
                let ratio = &b[r] / &a[r][entering];
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((leaving_row, _)) = leave else {
            return Err(LpError::Unbounded);
        };
        *pivots += 1;
        if *pivots > MAX_PIVOTS {
            return Err(LpError::IterationLimit);
        }
        pivot(a, b, basis, cost_row, leaving_row, entering);
    }
}

fn pivot(
    a: &mut [Vec<Rational>],
    b: &mut [Rational],
    basis: &mut [usize],
    cost_row: &mut [Rational],
    row: usize,
    col: usize,
) {
    let total_cols = a[row].len();
    let inv = a[row][col].clone();
    for v in a[row].iter_mut() {
        *v /= &inv;
    }
    b[row] /= &inv;
    for r in 0..a.len() {
        if r == row || a[r][col].is_zero() {
            continue;
        }
        let f = a[r][col].clone();
        for j in 0..total_cols {
            let sub = &f * &a[row][j];
            a[r][j] -= sub;
        }
        let sub = &f * &b[row];
        b[r] -= sub;
    }
    if !cost_row[col].is_zero() {
        let f = cost_row[col].clone();
        for j in 0..total_cols {
            let sub = &f * &a[row][j];
            cost_row[j] -= sub;
        }
        let sub = &f * &b[row];
        cost_row[total_cols] -= sub;
    }
    basis[row] = col;
}
