//! The τ-distance: the least `ε >= 0` with `th({|f − g| > ε}) <= ε`.
//!
//! Writing `0 = v_0 < v_1 < …` for the distinct values of `|f − g|` (with 0
//! added), the exceedance set `{|f − g| > ε}` is constant on each
//! `[v_k, v_{k+1})`, so the infimum is the attained minimum
//! `min_k max(v_k, th({|f − g| > v_k}))`.

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{level_set, LevelMode, ProductFunction};
use crate::scalar::Scalar;
use crate::thickness::thickness;

#[derive(Debug, Clone, PartialEq)]
pub struct TauResult<S> {
    pub value: S,
    /// Smallest ε at which the ball condition holds; equal to `value`.
    pub witness_level: S,
    /// `th({|f − g| > value})`.
    pub witness_set_thickness: S,
}

/// Distinct values of `|f|` together with 0, ascending.
pub(crate) fn breakpoints<S: Scalar>(f: &ProductFunction<S>) -> Vec<S> {
    let mut vals: Vec<S> = f.values().iter().map(|v| v.abs()).collect();
    vals.push(S::zero());
    vals.sort_by(|a, b| a.total_cmp(b));
    vals.dedup();
    vals
}

fn exceedance_thickness<S: Scalar>(d: &ProductFunction<S>, eps: &S) -> S {
    thickness(&level_set(d, eps, LevelMode::Above)).value
}

pub fn tau_distance<S: Scalar>(f: &ProductFunction<S>, g: &ProductFunction<S>) -> Result<TauResult<S>> {
    let d = f.sub(g)?.abs();
    let levels = breakpoints(&d);
    let candidates: Vec<(S, S)> = levels
        .par_iter()
        .map(|v| {
            let th = exceedance_thickness(&d, v);
            (S::max_of(v, &th), th)
        })
        .collect();
    let (value, _) =
        candidates.iter().min_by(|a, b| a.0.total_cmp(&b.0)).cloned().expect("level list always contains 0");
    let witness_set_thickness = exceedance_thickness(&d, &value);
    Ok(TauResult { witness_level: value.clone(), value, witness_set_thickness })
}

/// `th({|f − g| > ε}) <= ε`, compared exactly.
pub fn tau_ball_check<S: Scalar>(f: &ProductFunction<S>, g: &ProductFunction<S>, eps: &S) -> Result<bool> {
    let d = f.sub(g)?.abs();
    Ok(exceedance_thickness(&d, eps) <= *eps)
}

/// `τ <= sqrt(2·s)` for `τ, s >= 0`, decided as `τ² <= 2·s` without roots.
pub fn within_sqrt_bound<S: Scalar>(tau: &S, s: &S) -> bool {
    tau.clone() * tau.clone() <= S::from_i64(2) * s.clone()
}
