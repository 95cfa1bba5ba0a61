//! Dense tableau simplex with Bland's rule.
//!
//! Only used as an independent oracle for the combinatorial solvers, so it
//! favours plainness over speed. Problems are stated in inequality form:
//! maximize `c·x` subject to `A x <= b`, `x >= 0`.

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar, Tol};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub rows: Vec<Vec<S>>,
    pub rhs: Vec<S>,
}

impl<S: Scalar> LinearProgram<S> {
    /// Maximize `objective · x`.
    pub fn maximize(objective: Vec<S>) -> Self {
        LinearProgram { objective, rows: Vec::new(), rhs: Vec::new() }
    }

    /// Minimize `objective · x`, stated as maximizing the negation.
    pub fn minimize(objective: Vec<S>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn le(mut self, row: Vec<S>, b: S) -> Self {
        self.rows.push(row);
        self.rhs.push(b);
        self
    }

    pub fn ge(self, row: Vec<S>, b: S) -> Self {
        self.le(row.into_iter().map(|a| -a).collect(), -b)
    }

    pub fn eq(self, row: Vec<S>, b: S) -> Self {
        self.le(row.clone(), b.clone()).ge(row, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    /// Optimal value of the maximization.
    pub value: S,
    pub primal: Vec<S>,
    /// One nonnegative multiplier per inequality row; `b·y = value`.
    pub dual: Vec<S>,
}

struct Tableau<S> {
    /// `m` rows over `width` columns.
    t: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    /// Reduced costs of the current objective.
    reduced: Vec<S>,
    value: S,
    forbidden: Vec<bool>,
    tol: Tol,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        let pivot_row = self.t[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for k in 0..self.t.len() {
            if k == r || self.t[k][c].is_zero_exact() {
                continue;
            }
            let factor = self.t[k][c].clone();
            for (v, pv) in self.t[k].iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
            self.rhs[k] = self.rhs[k].clone() - factor * pivot_rhs.clone();
        }
        let factor = self.reduced[c].clone();
        if !factor.is_zero_exact() {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
            self.value = self.value.clone() + factor * pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn step(&mut self) -> Step {
        let entering = (0..self.reduced.len()).find(|&j| !self.forbidden[j] && self.reduced[j].is_pos(self.tol));
        let Some(c) = entering else { return Step::Optimal };
        let mut leave: Option<(usize, S)> = None;
        for r in 0..self.t.len() {
            if !self.t[r][c].is_pos(self.tol) {
                continue;
            }
            let ratio = self.rhs[r].clone() / self.t[r][c].clone();
            let better = match &leave {
                None => true,
                Some((lr, best)) => {
                    ratio.lt_tol(best, self.tol) || (ratio.eq_tol(best, self.tol) && self.basis[r] < self.basis[*lr])
                }
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        match leave {
            None => Step::Unbounded,
            Some((r, _)) => {
                self.pivot(r, c);
                Step::Pivoted
            }
        }
    }

    fn run(&mut self) -> Result<()> {
        loop {
            match self.step() {
                Step::Optimal => return Ok(()),
                Step::Unbounded => return Err(Error::Unbounded),
                Step::Pivoted => {}
            }
        }
    }

    /// Installs objective `c` (indexed by column) expressed in the current basis.
    fn set_objective(&mut self, c: &[S]) {
        let mut reduced = c.to_vec();
        let mut value = S::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = c[b].clone();
            if cb.is_zero_exact() {
                continue;
            }
            for (v, a) in reduced.iter_mut().zip(&self.t[r]) {
                *v = v.clone() - cb.clone() * a.clone();
            }
            value = value + cb * self.rhs[r].clone();
        }
        self.reduced = reduced;
        self.value = value;
    }
}

pub fn dense_lp_solve<S: Scalar>(lp: &LinearProgram<S>, tol: Tol) -> Result<LpSolution<S>> {
    let n = lp.vars();
    let m = lp.rows.len();
    if lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(Error::dims("constraint rows must match the objective length"));
    }
    // Columns: n structural, m slacks, one artificial.
    let art = n + m;
    let width = n + m + 1;
    let mut t = Vec::with_capacity(m);
    for (r, row) in lp.rows.iter().enumerate() {
        let mut line = row.clone();
        line.extend((0..m).map(|k| if k == r { S::one() } else { S::zero() }));
        line.push(-S::one());
        t.push(line);
    }
    let mut tab = Tableau {
        t,
        rhs: lp.rhs.clone(),
        basis: (n..n + m).collect(),
        reduced: vec![S::zero(); width],
        value: S::zero(),
        forbidden: vec![false; width],
        tol,
    };

    let most_negative = (0..m)
        .filter(|&r| tab.rhs[r].lt_tol(&S::zero(), tol))
        .min_by(|&a, &b| tab.rhs[a].total_cmp(&tab.rhs[b]).then(a.cmp(&b)));
    if let Some(r) = most_negative {
        // Phase one: maximize -artificial.
        let mut c = vec![S::zero(); width];
        c[art] = -S::one();
        tab.set_objective(&c);
        tab.pivot(r, art);
        tab.run().map_err(|_| Error::Internal("phase one cannot be unbounded".into()))?;
        if tab.value.lt_tol(&S::zero(), tol) {
            return Err(Error::Infeasible);
        }
        if let Some(r) = tab.basis.iter().position(|&b| b == art) {
            let c = (0..art)
                .find(|&j| !tab.t[r][j].is_zero_tol(tol))
                .ok_or_else(|| Error::Internal("degenerate artificial row".into()))?;
            tab.pivot(r, c);
        }
    }
    tab.forbidden[art] = true;
    for row in tab.t.iter_mut() {
        row[art] = S::zero();
    }
    let mut c = lp.objective.clone();
    c.extend(std::iter::repeat_with(S::zero).take(m + 1));
    tab.set_objective(&c);
    tab.run()?;

    let mut primal = vec![S::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            primal[b] = tab.rhs[r].clone();
        }
    }
    let dual: Vec<S> = (0..m).map(|k| -tab.reduced[n + k].clone()).collect();
    let value = sum(primal.iter().zip(&lp.objective).map(|(x, c)| x.clone() * c.clone()));
    Ok(LpSolution { value, primal, dual })
}
