//! Profiles of sampled kernels along a sequence of grids.

use rayon::prelude::*;

use crate::model::{DiscreteSpace, ProductFunction};
use crate::scalar::Scalar;

use super::stepfit::{vc_profile, EXACT_MAX_ATOMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `[x >= y]`.
    TriangleIndicator,
    /// `x · y`.
    SeparableSmooth,
    /// `|x − y|`.
    MetricKernel,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::TriangleIndicator, Family::SeparableSmooth, Family::MetricKernel];

    pub fn name(self) -> &'static str {
        match self {
            Family::TriangleIndicator => "triangle_indicator",
            Family::SeparableSmooth => "separable_smooth",
            Family::MetricKernel => "metric_kernel",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }

    /// The kernel sampled at `x_i = i/n` on the uniform `n`-point space.
    pub fn sample<S: Scalar>(self, n: usize) -> ProductFunction<S> {
        let x = DiscreteSpace::uniform(n).into_ref();
        let n = n as i64;
        ProductFunction::from_fn(x.clone(), x, |i, j| {
            let (i, j) = (i as i64, j as i64);
            match self {
                Family::TriangleIndicator => S::from_i64((i >= j) as i64),
                Family::SeparableSmooth => S::from_ratio(i * j, n * n),
                Family::MetricKernel => S::from_ratio((i - j).abs(), n),
            }
        })
        .expect("finite samples")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow<S> {
    pub n: usize,
    /// Exact profile, or the heuristic upper bound when `exact` is false.
    pub upper: S,
    /// Exact profile, or the residue-class lower bound when available.
    pub lower: Option<S>,
    pub exact: bool,
}

/// Sub-kernel on rows `≡ r` and columns `≡ s` modulo `q`.
fn residue_submatrix<S: Scalar>(f: &ProductFunction<S>, q: usize, r: usize, s: usize) -> ProductFunction<S> {
    let (n, m) = f.shape();
    let (a, b) = (n / q, m / q);
    let x = DiscreteSpace::uniform(a).into_ref();
    let y = DiscreteSpace::uniform(b).into_ref();
    ProductFunction::from_fn(x, y, |i, j| f.get(i * q + r, j * q + s).clone()).expect("entries are finite")
}

/// Lower bound on `min_P e(P)` for a kernel on uniform `n × n` spaces with
/// `n` a multiple of 8: the least exact profile over the `8 × 8` residue
/// sub-kernels. Restricting an optimal partition to a residue row class
/// keeps block ranges, and the lightest residue class carries at most the
/// average exceptional weight, so each sub-profile bound applies.
pub fn residue_lower_bound<S: Scalar>(f: &ProductFunction<S>, classes: usize) -> Option<S> {
    let (n, m) = f.shape();
    let uniform = |w: &[S]| w.windows(2).all(|p| p[0] == p[1]);
    if n != m || n % EXACT_MAX_ATOMS != 0 || !uniform(f.x_space().weights()) || !uniform(f.y_space().weights()) {
        return None;
    }
    let q = n / EXACT_MAX_ATOMS;
    let pairs: Vec<(usize, usize)> = (0..q).flat_map(|r| (0..q).map(move |s| (r, s))).collect();
    pairs
        .par_iter()
        .map(|&(r, s)| vc_profile(&residue_submatrix(f, q, r, s), classes).value)
        .collect::<Vec<S>>()
        .into_iter()
        .reduce(|a, b| S::min_of(&a, &b))
}

pub fn refinement_study<S: Scalar>(family: Family, grid_sizes: &[usize], classes: usize) -> Vec<RefinementRow<S>> {
    grid_sizes
        .par_iter()
        .map(|&n| {
            let f = family.sample::<S>(n);
            let p = vc_profile(&f, classes);
            let lower = if p.exact { Some(p.value.clone()) } else { residue_lower_bound(&f, classes) };
            RefinementRow { n, upper: p.value, lower, exact: p.exact }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn samples() {
        let t = Family::TriangleIndicator.sample::<Rational>(4);
        assert_eq!(*t.get(2, 1), Rational::from_i64(1));
        assert_eq!(*t.get(1, 2), Rational::from_i64(0));
        let s = Family::SeparableSmooth.sample::<Rational>(4);
        assert_eq!(*s.get(2, 3), Rational::from_ratio(6, 16));
        let m = Family::MetricKernel.sample::<Rational>(4);
        assert_eq!(*m.get(0, 3), Rational::from_ratio(3, 4));
        assert_eq!(Family::from_name("metric_kernel"), Some(Family::MetricKernel));
    }

    #[test]
    fn lower_bound_needs_uniform_multiple_of_eight() {
        let f = Family::MetricKernel.sample::<Rational>(12);
        assert!(residue_lower_bound(&f, 2).is_none());
    }

    #[test]
    fn lower_bound_at_eight_is_the_profile() {
        let f = Family::SeparableSmooth.sample::<Rational>(8);
        assert_eq!(residue_lower_bound(&f, 2), Some(vc_profile(&f, 2).value));
    }
}
