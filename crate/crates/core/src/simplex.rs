//! Dense two-phase simplex over exact big rationals.
//!
//! Small and standard: full tableau, Dantzig pivoting with a permanent
//! switch to Bland's rule after a pivot budget (guaranteeing termination
//! on degenerate programs), artificial variables for equality rows.
//! Right-hand sides must be non-negative.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub num_vars: usize,
    /// Maximized.
    pub objective: Vec<BigRational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub(crate) enum Solution {
    Optimal {
        value: BigRational,
        point: Vec<BigRational>,
    },
    /// Feasible `point` plus a recession direction `ray` with positive
    /// objective slope.
    Unbounded {
        point: Vec<BigRational>,
        ray: Vec<BigRational>,
    },
    Infeasible,
}

struct Tableau {
    /// `rows x (cols + 1)`; last column is the right-hand side.
    rows: Vec<Vec<BigRational>>,
    /// Basic column of each row.
    basis: Vec<usize>,
    /// Reduced costs, last entry the current objective value.
    reduced: Vec<BigRational>,
    /// Columns barred from entering (artificials in phase 2).
    banned: Vec<bool>,
    num_structural: usize,
    cols: usize,
    pivots: usize,
    bland_after: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &BigRational {
        &self.rows[row][self.cols]
    }

    /// Elementary pivot: make column `col` basic in `row`.
    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let inv = self.rows[row][col].clone().recip();
        for x in self.rows[row].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (x, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        if !self.reduced[col].is_zero() {
            let factor = self.reduced[col].clone();
            for (x, p) in self.reduced.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Entering column: Dantzig (most positive reduced cost) until the
    /// pivot budget is spent, then Bland (lowest index) for termination.
    fn entering(&self) -> Option<usize> {
        let bland = self.pivots >= self.bland_after;
        let mut best: Option<usize> = None;
        for j in 0..self.cols {
            if self.banned[j] || !self.reduced[j].is_positive() {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|b| self.reduced[j] > self.reduced[b]) {
                best = Some(j);
            }
        }
        best
    }

    /// Leaving row by the minimum-ratio test; ties broken toward the
    /// smallest basic column (keeps the Bland regime cycle-free).
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, BigRational)> = None;
        for r in 0..self.rows.len() {
            if !self.rows[r][col].is_positive() {
                continue;
            }
            let ratio = self.rhs(r) / &self.rows[r][col];
            let better = match &best {
                None => true,
                Some((br, bratio)) => {
                    ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                }
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    /// Runs the simplex loop to optimality or unboundedness. Returns the
    /// entering column on unboundedness.
    fn optimize(&mut self) -> Option<usize> {
        while let Some(col) = self.entering() {
            match self.leaving(col) {
                Some(row) => self.pivot(row, col),
                None => return Some(col),
            }
        }
        None
    }

    fn structural_point(&self) -> Vec<BigRational> {
        let mut point = vec![BigRational::zero(); self.num_structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                point[b] = self.rhs(r).clone();
            }
        }
        point
    }

    /// Structural projection of the unbounded ray for entering column
    /// `col`: the entering variable grows at rate 1 while basic variables
    /// adjust by their tableau column.
    fn structural_ray(&self, col: usize) -> Vec<BigRational> {
        let mut ray = vec![BigRational::zero(); self.num_structural];
        if col < self.num_structural {
            ray[col] = BigRational::one();
        }
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                ray[b] = -self.rows[r][col].clone();
            }
        }
        ray
    }
}

/// Maximizes `objective` subject to the constraints (variables
/// non-negative). All right-hand sides must be non-negative.
pub(crate) fn maximize(program: &Program) -> Solution {
    let n = program.num_vars;
    let m = program.constraints.len();
    assert!(
        program
            .constraints
            .iter()
            .all(|c| !c.rhs.is_negative() && c.coeffs.len() == n),
        "constraints need non-negative rhs and full-width coefficients"
    );
    let num_slack = program
        .constraints
        .iter()
        .filter(|c| c.relation == Relation::Le)
        .count();
    let num_art = m - num_slack;
    let cols = n + num_slack + num_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut artificial_rows = Vec::new();
    let mut next_slack = n;
    let mut next_art = n + num_slack;
    for c in &program.constraints {
        let mut row = vec![BigRational::zero(); cols + 1];
        row[..n].clone_from_slice(&c.coeffs);
        row[cols] = c.rhs.clone();
        match c.relation {
            Relation::Le => {
                row[next_slack] = BigRational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Eq => {
                row[next_art] = BigRational::one();
                basis.push(next_art);
                artificial_rows.push(rows.len());
                next_art += 1;
            }
        }
        rows.push(row);
    }

    let mut banned = vec![false; cols];
    let mut t = Tableau {
        rows,
        basis,
        reduced: vec![BigRational::zero(); cols + 1],
        banned: banned.clone(),
        num_structural: n,
        cols,
        pivots: 0,
        bland_after: 200 + 10 * (m + cols),
    };

    // Phase 1: drive the artificial variables to zero. Maximizing
    // -sum(artificials) gives reduced costs equal to the column sums over
    // artificial rows.
    if num_art > 0 {
        for j in 0..=cols {
            let mut s = BigRational::zero();
            for &r in &artificial_rows {
                s += &t.rows[r][j];
            }
            t.reduced[j] = s;
        }
        for j in (n + num_slack)..cols {
            t.reduced[j] = BigRational::zero();
        }
        let unbounded = t.optimize();
        assert!(unbounded.is_none(), "phase 1 objective is bounded");
        let infeasibility: BigRational = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= n + num_slack)
            .map(|(r, _)| t.rhs(r).clone())
            .sum();
        if !infeasibility.is_zero() {
            return Solution::Infeasible;
        }
        // Pivot lingering artificials out of the (degenerate) basis, or
        // drop their rows as redundant.
        for r in (0..t.rows.len()).rev() {
            if t.basis[r] < n + num_slack {
                continue;
            }
            match (0..n + num_slack).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                }
            }
        }
        for flag in banned.iter_mut().skip(n + num_slack) {
            *flag = true;
        }
        t.banned = banned;
    }

    // Phase 2: true objective. Reduced costs from scratch against the
    // current basis (slack and artificial costs are zero).
    let cost = |j: usize| {
        if j < n {
            program.objective[j].clone()
        } else {
            BigRational::zero()
        }
    };
    let mut reduced = vec![BigRational::zero(); cols + 1];
    for (j, slot) in reduced.iter_mut().enumerate().take(cols) {
        let mut z = BigRational::zero();
        for (r, &b) in t.basis.iter().enumerate() {
            let cb = cost(b);
            if !cb.is_zero() {
                z += cb * &t.rows[r][j];
            }
        }
        *slot = cost(j) - z;
    }
    let mut value = BigRational::zero();
    for (r, &b) in t.basis.iter().enumerate() {
        let cb = cost(b);
        if !cb.is_zero() {
            value += cb * t.rhs(r);
        }
    }
    // The objective row carries -value so pivots update it like any row.
    reduced[cols] = -value;
    t.reduced = reduced;

    match t.optimize() {
        None => Solution::Optimal {
            value: -t.reduced[t.cols].clone(),
            point: t.structural_point(),
        },
        Some(col) => Solution::Unbounded {
            point: t.structural_point(),
            ray: t.structural_ray(col),
        },
    }
}
