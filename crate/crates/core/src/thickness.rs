//! Thickness of product sets.
//!
//! `th(Z)` is the least `μ(X̃) + ν(Ỹ)` over pairs with
//! `Z ⊂ (X̃ × Y) ∪ (X × Ỹ)`: a minimum weighted vertex cover of the bipartite
//! graph whose edges are the cells of `Z`. Its fractional form (functions
//! `f: X → [0,1]`, `g: Y → [0,1]` with `f(x) + g(y) >= 1` on `Z`) has the
//! same optimum, and the max-flow certificate is a subbistochastic measure
//! carried by `Z` with total mass `th(Z)`.

use crate::error::{Error, Result};
use crate::flow::{min_weighted_vertex_cover, BipartiteCoverInstance};
use crate::matrix::Grid;
use crate::model::{level_set, LevelMode, ProductFunction, ProductSet};
use crate::scalar::{sum, Scalar};

/// Largest `|X| + |Y|` accepted by [`thickness_bruteforce`].
pub const BRUTEFORCE_MAX_ATOMS: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessResult<S> {
    pub value: S,
    /// `X̃`, as atom indices.
    pub cover_x: Vec<usize>,
    /// `Ỹ`, as atom indices.
    pub cover_y: Vec<usize>,
    /// Fractional certificate `f`; the indicator of `cover_x`.
    pub fractional_f: Vec<S>,
    /// Fractional certificate `g`; the indicator of `cover_y`.
    pub fractional_g: Vec<S>,
    /// Max-flow on the cells of `Z`; total mass equals `value`.
    pub flow: Grid<S>,
}

impl<S: Scalar> ThicknessResult<S> {
    /// Checks every invariant of the result against `z`.
    pub fn verify(&self, z: &ProductSet<S>) -> Result<()> {
        let (x, y) = (z.x_space(), z.y_space());
        let tol = z.tol();
        let cover_value = x.measure_of(|i| self.cover_x.contains(&i)) + y.measure_of(|j| self.cover_y.contains(&j));
        if !cover_value.eq_tol(&self.value, tol) {
            return Err(Error::Internal("cover weight differs from reported thickness".into()));
        }
        if let Some((i, j)) = z.cells().find(|(i, j)| !self.cover_x.contains(i) && !self.cover_y.contains(j)) {
            return Err(Error::Internal(format!("cell ({i}, {j}) is not covered")));
        }
        for (i, j) in z.cells() {
            let s = self.fractional_f[i].clone() + self.fractional_g[j].clone();
            if !S::one().le_tol(&s, tol) {
                return Err(Error::Internal(format!("fractional pair below 1 at ({i}, {j})")));
            }
        }
        let frac = sum(self.fractional_f.iter().zip(x.weights()).map(|(f, w)| f.clone() * w.clone()))
            + sum(self.fractional_g.iter().zip(y.weights()).map(|(g, w)| g.clone() * w.clone()));
        if !frac.eq_tol(&self.value, tol) {
            return Err(Error::Internal("fractional certificate value differs".into()));
        }
        let plan = crate::model::Plan::new(x.clone(), y.clone(), self.flow.clone())?;
        if !plan.is_subbistochastic() {
            return Err(Error::Internal("flow certificate exceeds a marginal".into()));
        }
        if let Some(((i, j), _)) = self.flow.indexed().find(|((i, j), v)| !z.contains(*i, *j) && !v.is_zero_exact()) {
            return Err(Error::Internal(format!("flow outside Z at ({i}, {j})")));
        }
        if !plan.total().eq_tol(&self.value, tol) {
            return Err(Error::Internal("flow value differs from cover value".into()));
        }
        Ok(())
    }
}

pub(crate) fn cover_instance<S: Scalar>(z: &ProductSet<S>) -> BipartiteCoverInstance<S> {
    BipartiteCoverInstance::new(z.x_space().weights().to_vec(), z.y_space().weights().to_vec(), z.cells().collect())
        .expect("space weights are positive and cells are in range")
}

pub fn thickness<S: Scalar>(z: &ProductSet<S>) -> ThicknessResult<S> {
    let inst = cover_instance(z);
    let sol = min_weighted_vertex_cover(&inst, z.tol());
    let indicator = |len: usize, picked: &[usize]| -> Vec<S> {
        (0..len).map(|k| if picked.contains(&k) { S::one() } else { S::zero() }).collect()
    };
    ThicknessResult {
        fractional_f: indicator(z.x_space().len(), &sol.rows),
        fractional_g: indicator(z.y_space().len(), &sol.cols),
        value: sol.value,
        cover_x: sol.rows,
        cover_y: sol.cols,
        flow: sol.flow,
    }
}

/// Thickness by enumerating every pair `(X̃, Ỹ)` of atom subsets.
pub fn thickness_bruteforce<S: Scalar>(z: &ProductSet<S>) -> Result<S> {
    let (n, m) = (z.x_space().len(), z.y_space().len());
    if n + m > BRUTEFORCE_MAX_ATOMS {
        return Err(Error::TooLarge(format!(
            "{n} + {m} atoms exceeds the enumeration limit of {BRUTEFORCE_MAX_ATOMS}"
        )));
    }
    let subset_weights = |w: &[S]| -> Vec<S> {
        let mut out = vec![S::zero(); 1 << w.len()];
        for mask in 1usize..out.len() {
            let low = mask.trailing_zeros() as usize;
            out[mask] = out[mask & (mask - 1)].clone() + w[low].clone();
        }
        out
    };
    let wx = subset_weights(z.x_space().weights());
    let wy = subset_weights(z.y_space().weights());
    let row_cells: Vec<usize> =
        (0..n).map(|i| (0..m).filter(|&j| z.contains(i, j)).fold(0usize, |acc, j| acc | (1 << j))).collect();

    let mut best: Option<S> = None;
    for (xs, cx) in wx.iter().enumerate() {
        let needed = (0..n).filter(|&i| xs & (1 << i) == 0).fold(0usize, |acc, i| acc | row_cells[i]);
        for (ys, cy) in wy.iter().enumerate() {
            if needed & !ys != 0 {
                continue;
            }
            let cost = cx.clone() + cy.clone();
            if best.as_ref().is_none_or(|b| cost < *b) {
                best = Some(cost);
            }
        }
    }
    Ok(best.expect("the full cover is always feasible"))
}

/// `th({|f| >= λ})`.
pub fn thickness_of_level_set<S: Scalar>(f: &ProductFunction<S>, lambda: &S) -> S {
    thickness(&level_set(&f.abs(), lambda, LevelMode::AtLeast)).value
}
