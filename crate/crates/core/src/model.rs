//! Atomic measure spaces and the objects living on their products.
//!
//! A [`DiscreteSpace`] is a finite set of atoms with strictly positive
//! weights summing to one. Since every atom carries positive mass, the only
//! null set is the empty set: "almost everywhere" statements become plain
//! pointwise statements and thickness coincides with proper thickness.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Grid;
use crate::scalar::{sum, Scalar, Tol};

pub type SpaceRef<S> = Arc<DiscreteSpace<S>>;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace<S> {
    labels: Vec<String>,
    weights: Vec<S>,
    tol: Tol,
}

impl<S: Scalar> DiscreteSpace<S> {
    /// Builds a space without checking its invariants. Use
    /// [`validate_space`] or [`DiscreteSpace::new`] for checked construction.
    pub fn raw(labels: Vec<String>, weights: Vec<S>) -> Self {
        DiscreteSpace { labels, weights, tol: Tol::default() }
    }

    pub fn new(labels: Vec<String>, weights: Vec<S>) -> Result<Self> {
        Self::raw(labels, weights).validated()
    }

    pub fn with_tol(mut self, tol: Tol) -> Self {
        self.tol = tol;
        self
    }

    pub fn validated(self) -> Result<Self> {
        let report = validate_space(&self);
        match report.violations.first() {
            None => Ok(self),
            Some(v) => Err(Error::Validation { invariant: v.invariant(), detail: report.describe() }),
        }
    }

    /// Unlabelled weights get labels `"0"`, `"1"`, ...
    pub fn from_weights(weights: Vec<S>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform space needs at least one atom");
        let w = S::from_ratio(1, n as i64);
        DiscreteSpace { labels: (0..n).map(|i| i.to_string()).collect(), weights: vec![w; n], tol: Tol::default() }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &S {
        &self.weights[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tol(&self) -> Tol {
        self.tol
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Total weight of the atoms selected by `pick`.
    pub fn measure_of(&self, pick: impl Fn(usize) -> bool) -> S {
        sum((0..self.len()).filter(|&i| pick(i)).map(|i| self.weights[i].clone()))
    }

    pub fn into_ref(self) -> SpaceRef<S> {
        Arc::new(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceViolation {
    LengthMismatch { labels: usize, weights: usize },
    Empty,
    NonPositiveWeight { index: usize },
    NonFiniteWeight { index: usize },
    SumNotOne { sum: String },
    DuplicateLabel { label: String },
}

impl SpaceViolation {
    pub fn invariant(&self) -> &'static str {
        match self {
            SpaceViolation::LengthMismatch { .. } => "labels and weights have equal length",
            SpaceViolation::Empty => "space has at least one atom",
            SpaceViolation::NonPositiveWeight { .. } => "weights are strictly positive",
            SpaceViolation::NonFiniteWeight { .. } => "weights are finite",
            SpaceViolation::SumNotOne { .. } => "weights sum ≠ 1",
            SpaceViolation::DuplicateLabel { .. } => "labels are unique",
        }
    }
}

impl std::fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceViolation::LengthMismatch { labels, weights } => {
                write!(f, "{labels} labels but {weights} weights")
            }
            SpaceViolation::Empty => write!(f, "no atoms"),
            SpaceViolation::NonPositiveWeight { index } => write!(f, "nonpositive weight at index {index}"),
            SpaceViolation::NonFiniteWeight { index } => write!(f, "non-finite weight at index {index}"),
            SpaceViolation::SumNotOne { sum } => write!(f, "weights sum ≠ 1 (sum = {sum})"),
            SpaceViolation::DuplicateLabel { label } => write!(f, "duplicate label {label:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpaceReport {
    pub violations: Vec<SpaceViolation>,
}

impl SpaceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self) -> String {
        self.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
    }
}

pub fn validate_space<S: Scalar>(space: &DiscreteSpace<S>) -> SpaceReport {
    let mut violations = Vec::new();
    if space.labels.len() != space.weights.len() {
        violations.push(SpaceViolation::LengthMismatch { labels: space.labels.len(), weights: space.weights.len() });
    }
    if space.weights.is_empty() {
        violations.push(SpaceViolation::Empty);
    }
    for (index, w) in space.weights.iter().enumerate() {
        if !w.is_finite() {
            violations.push(SpaceViolation::NonFiniteWeight { index });
        } else if *w <= S::zero() {
            violations.push(SpaceViolation::NonPositiveWeight { index });
        }
    }
    let total = sum(space.weights.iter().cloned());
    if !space.weights.is_empty() && !total.eq_tol(&S::one(), space.tol) {
        violations.push(SpaceViolation::SumNotOne { sum: total.to_report_string() });
    }
    let mut seen = HashSet::new();
    for label in &space.labels {
        if !seen.insert(label.as_str()) {
            violations.push(SpaceViolation::DuplicateLabel { label: label.clone() });
        }
    }
    SpaceReport { violations }
}

pub(crate) fn pair_tol<S: Scalar>(x: &DiscreteSpace<S>, y: &DiscreteSpace<S>) -> Tol {
    Tol(x.tol.0.max(y.tol.0))
}

fn check_factors<S: Scalar>(what: &str, x: &SpaceRef<S>, y: &SpaceRef<S>, shape: (usize, usize)) -> Result<()> {
    if shape != (x.len(), y.len()) {
        return Err(Error::dims(format!(
            "{what} is {}x{}, factors have {} and {} atoms",
            shape.0,
            shape.1,
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn same_factors<S: Scalar>(a: (&SpaceRef<S>, &SpaceRef<S>), b: (&SpaceRef<S>, &SpaceRef<S>)) -> Result<()> {
    let same = |p: &SpaceRef<S>, q: &SpaceRef<S>| Arc::ptr_eq(p, q) || p == q;
    if same(a.0, b.0) && same(a.1, b.1) {
        Ok(())
    } else {
        Err(Error::dims("objects live on different product spaces"))
    }
}

/// A real function on `X × Y`, entry `(i, j)` is `f(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction<S> {
    x: SpaceRef<S>,
    y: SpaceRef<S>,
    values: Grid<S>,
}

impl<S: Scalar> ProductFunction<S> {
    pub fn new(x: SpaceRef<S>, y: SpaceRef<S>, values: Grid<S>) -> Result<Self> {
        check_factors("function", &x, &y, values.shape())?;
        if let Some(((i, j), _)) = values.indexed().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite function value at ({i}, {j})")));
        }
        Ok(ProductFunction { x, y, values })
    }

    pub fn from_fn(x: SpaceRef<S>, y: SpaceRef<S>, f: impl FnMut(usize, usize) -> S) -> Result<Self> {
        let values = Grid::from_fn(x.len(), y.len(), f);
        Self::new(x, y, values)
    }

    pub fn constant(x: SpaceRef<S>, y: SpaceRef<S>, c: S) -> Self {
        let values = Grid::filled(x.len(), y.len(), c);
        ProductFunction { x, y, values }
    }

    pub fn x_space(&self) -> &SpaceRef<S> {
        &self.x
    }

    pub fn y_space(&self) -> &SpaceRef<S> {
        &self.y
    }

    pub fn values(&self) -> &Grid<S> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.values[(i, j)]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn tol(&self) -> Tol {
        pair_tol(&self.x, &self.y)
    }

    pub fn map(&self, f: impl FnMut(&S) -> S) -> Self {
        ProductFunction { x: self.x.clone(), y: self.y.clone(), values: self.values.map(f) }
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(&S, &S) -> S) -> Result<Self> {
        same_factors((&self.x, &self.y), (&other.x, &other.y))?;
        let values = Grid::from_fn(self.x.len(), self.y.len(), |i, j| f(&self.values[(i, j)], &other.values[(i, j)]));
        Ok(ProductFunction { x: self.x.clone(), y: self.y.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn max_abs(&self) -> S {
        self.values.iter().fold(S::zero(), |m, v| S::max_of(&m, &v.abs()))
    }

    pub(crate) fn check_same_factors(&self, x: &SpaceRef<S>, y: &SpaceRef<S>) -> Result<()> {
        same_factors((&self.x, &self.y), (x, y))
    }
}

/// A subset `Z ⊂ X × Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSet<S> {
    x: SpaceRef<S>,
    y: SpaceRef<S>,
    members: Grid<bool>,
}

impl<S: Scalar> ProductSet<S> {
    pub fn new(x: SpaceRef<S>, y: SpaceRef<S>, members: Grid<bool>) -> Result<Self> {
        check_factors("set", &x, &y, members.shape())?;
        Ok(ProductSet { x, y, members })
    }

    pub fn from_fn(x: SpaceRef<S>, y: SpaceRef<S>, f: impl FnMut(usize, usize) -> bool) -> Self {
        let members = Grid::from_fn(x.len(), y.len(), f);
        ProductSet { x, y, members }
    }

    pub fn empty(x: SpaceRef<S>, y: SpaceRef<S>) -> Self {
        Self::from_fn(x, y, |_, _| false)
    }

    pub fn full(x: SpaceRef<S>, y: SpaceRef<S>) -> Self {
        Self::from_fn(x, y, |_, _| true)
    }

    pub fn x_space(&self) -> &SpaceRef<S> {
        &self.x
    }

    pub fn y_space(&self) -> &SpaceRef<S> {
        &self.y
    }

    pub fn members(&self) -> &Grid<bool> {
        &self.members
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.members[(i, j)]
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.indexed().filter(|(_, &m)| m).map(|(c, _)| c)
    }

    pub fn tol(&self) -> Tol {
        pair_tol(&self.x, &self.y)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        same_factors((&self.x, &self.y), (&other.x, &other.y))?;
        Ok(Self::from_fn(self.x.clone(), self.y.clone(), |i, j| self.members[(i, j)] || other.members[(i, j)]))
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.members.iter().zip(other.members.iter()).all(|(&a, &b)| !a || b)
    }
}

/// Nonnegative pair `(a(x), b(y))`; dominates `|f|` when
/// `a(i) + b(j) >= |f(i, j)|` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableMajorant<S> {
    pub a: Vec<S>,
    pub b: Vec<S>,
}

impl<S: Scalar> SeparableMajorant<S> {
    pub fn new(a: Vec<S>, b: Vec<S>) -> Result<Self> {
        for (side, v) in [("a", &a), ("b", &b)] {
            if let Some(k) = v.iter().position(|e| !e.is_finite() || *e < S::zero()) {
                return Err(Error::InvalidInput(format!("majorant entry {side}[{k}] is negative or non-finite")));
            }
        }
        Ok(SeparableMajorant { a, b })
    }

    /// `Σ μ_i a_i + Σ ν_j b_j`.
    pub fn integral(&self, x: &DiscreteSpace<S>, y: &DiscreteSpace<S>) -> S {
        let ia = sum(self.a.iter().zip(x.weights()).map(|(a, w)| a.clone() * w.clone()));
        let ib = sum(self.b.iter().zip(y.weights()).map(|(b, w)| b.clone() * w.clone()));
        ia + ib
    }

    /// First cell where `a(i) + b(j) < |f(i, j)|`, if any.
    pub fn violation(&self, f: &ProductFunction<S>, tol: Tol) -> Option<(usize, usize)> {
        if self.a.len() != f.shape().0 || self.b.len() != f.shape().1 {
            return Some((usize::MAX, usize::MAX));
        }
        f.values()
            .indexed()
            .find(|((i, j), v)| !v.abs().le_tol(&(self.a[*i].clone() + self.b[*j].clone()), tol))
            .map(|(c, _)| c)
    }
}

/// Access to a mass matrix over `X × Y`, shared by nonnegative and signed plans.
pub trait MassView<S: Scalar> {
    fn x_space(&self) -> &SpaceRef<S>;
    fn y_space(&self) -> &SpaceRef<S>;
    fn mass(&self) -> &Grid<S>;
}

fn row_sums<S: Scalar>(g: &Grid<S>) -> Vec<S> {
    (0..g.rows()).map(|i| sum(g.row(i).iter().cloned())).collect()
}

fn col_sums<S: Scalar>(g: &Grid<S>) -> Vec<S> {
    (0..g.cols()).map(|j| sum((0..g.rows()).map(|i| g[(i, j)].clone()))).collect()
}

/// A nonnegative measure on `X × Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan<S> {
    x: SpaceRef<S>,
    y: SpaceRef<S>,
    mass: Grid<S>,
}

impl<S: Scalar> Plan<S> {
    pub fn new(x: SpaceRef<S>, y: SpaceRef<S>, mass: Grid<S>) -> Result<Self> {
        check_factors("plan", &x, &y, mass.shape())?;
        if let Some(((i, j), _)) = mass.indexed().find(|(_, v)| !v.is_finite() || **v < S::zero()) {
            return Err(Error::InvalidInput(format!("plan mass at ({i}, {j}) is negative or non-finite")));
        }
        Ok(Plan { x, y, mass })
    }

    pub fn zero(x: SpaceRef<S>, y: SpaceRef<S>) -> Self {
        let mass = Grid::filled(x.len(), y.len(), S::zero());
        Plan { x, y, mass }
    }

    /// The product measure `μ × ν`.
    pub fn product(x: SpaceRef<S>, y: SpaceRef<S>) -> Self {
        let mass = Grid::from_fn(x.len(), y.len(), |i, j| x.weight(i).clone() * y.weight(j).clone());
        Plan { x, y, mass }
    }

    /// Mass `μ_i` on the diagonal cell `(i, i)`; needs `μ = ν`.
    pub fn diagonal(x: SpaceRef<S>, y: SpaceRef<S>) -> Result<Self> {
        if x.weights() != y.weights() {
            return Err(Error::dims("diagonal plan needs identical factor weights"));
        }
        let mass = Grid::from_fn(x.len(), y.len(), |i, j| if i == j { x.weight(i).clone() } else { S::zero() });
        Ok(Plan { x, y, mass })
    }

    pub fn row_marginals(&self) -> Vec<S> {
        row_sums(&self.mass)
    }

    pub fn col_marginals(&self) -> Vec<S> {
        col_sums(&self.mass)
    }

    pub fn total(&self) -> S {
        sum(self.mass.iter().cloned())
    }

    pub fn tol(&self) -> Tol {
        pair_tol(&self.x, &self.y)
    }

    /// Row marginals equal `μ` and column marginals equal `ν`.
    pub fn is_bistochastic(&self) -> bool {
        let tol = self.tol();
        let eq = |m: Vec<S>, w: &[S]| m.iter().zip(w).all(|(a, b)| a.eq_tol(b, tol));
        eq(self.row_marginals(), self.x.weights()) && eq(self.col_marginals(), self.y.weights())
    }

    /// Row marginals `<= μ` and column marginals `<= ν`.
    pub fn is_subbistochastic(&self) -> bool {
        let tol = self.tol();
        let le = |m: Vec<S>, w: &[S]| m.iter().zip(w).all(|(a, b)| a.le_tol(b, tol));
        le(self.row_marginals(), self.x.weights()) && le(self.col_marginals(), self.y.weights())
    }

    /// Mass on the cells of `z`.
    pub fn mass_on(&self, z: &ProductSet<S>) -> S {
        sum(z.cells().map(|c| self.mass[c].clone()))
    }

    pub fn into_mass(self) -> Grid<S> {
        self.mass
    }
}

impl<S: Scalar> MassView<S> for Plan<S> {
    fn x_space(&self) -> &SpaceRef<S> {
        &self.x
    }

    fn y_space(&self) -> &SpaceRef<S> {
        &self.y
    }

    fn mass(&self) -> &Grid<S> {
        &self.mass
    }
}

/// A signed measure on `X × Y` (quasibistochastic when its absolute
/// marginal densities are bounded, which always holds on atoms).
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPlan<S> {
    x: SpaceRef<S>,
    y: SpaceRef<S>,
    mass: Grid<S>,
}

impl<S: Scalar> SignedPlan<S> {
    pub fn new(x: SpaceRef<S>, y: SpaceRef<S>, mass: Grid<S>) -> Result<Self> {
        check_factors("signed plan", &x, &y, mass.shape())?;
        if let Some(((i, j), _)) = mass.indexed().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("signed mass at ({i}, {j}) is non-finite")));
        }
        Ok(SignedPlan { x, y, mass })
    }

    pub fn scale(&self, c: &S) -> Self {
        SignedPlan { x: self.x.clone(), y: self.y.clone(), mass: self.mass.map(|v| v.clone() * c.clone()) }
    }
}

impl<S: Scalar> From<&Plan<S>> for SignedPlan<S> {
    fn from(plan: &Plan<S>) -> Self {
        SignedPlan { x: plan.x.clone(), y: plan.y.clone(), mass: plan.mass.clone() }
    }
}

impl<S: Scalar> MassView<S> for SignedPlan<S> {
    fn x_space(&self) -> &SpaceRef<S> {
        &self.x
    }

    fn y_space(&self) -> &SpaceRef<S> {
        &self.y
    }

    fn mass(&self) -> &Grid<S> {
        &self.mass
    }
}

/// A candidate (semi)metric on the atoms of one space.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix<S> {
    space: SpaceRef<S>,
    dist: Grid<S>,
}

impl<S: Scalar> MetricMatrix<S> {
    pub fn new(space: SpaceRef<S>, dist: Grid<S>) -> Result<Self> {
        let n = space.len();
        if dist.shape() != (n, n) {
            return Err(Error::dims(format!(
                "distance matrix is {}x{}, space has {n} atoms",
                dist.rows(),
                dist.cols()
            )));
        }
        if let Some(((i, j), _)) = dist.indexed().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite distance at ({i}, {j})")));
        }
        Ok(MetricMatrix { space, dist })
    }

    pub fn space(&self) -> &SpaceRef<S> {
        &self.space
    }

    pub fn dist(&self) -> &Grid<S> {
        &self.dist
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.dist[(i, j)]
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// The metric viewed as a function of two variables on `X × X`.
    pub fn as_function(&self) -> ProductFunction<S> {
        ProductFunction { x: self.space.clone(), y: self.space.clone(), values: self.dist.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricWitness {
    NegativeEntry(usize, usize),
    NonzeroDiagonal(usize),
    Asymmetric(usize, usize),
    /// `(i, k, j)` with `d(i, k) > d(i, j) + d(j, k)`.
    Triangle(usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricClass {
    Metric,
    Semimetric,
    Invalid(MetricWitness),
}

pub fn validate_semimetric<S: Scalar>(m: &MetricMatrix<S>) -> MetricClass {
    let d = &m.dist;
    let n = m.len();
    let tol = m.space.tol();
    for i in 0..n {
        if !d[(i, i)].is_zero_tol(tol) {
            return MetricClass::Invalid(MetricWitness::NonzeroDiagonal(i));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if d[(i, j)].lt_tol(&S::zero(), tol) {
                return MetricClass::Invalid(MetricWitness::NegativeEntry(i, j));
            }
            if j > i && !d[(i, j)].eq_tol(&d[(j, i)], tol) {
                return MetricClass::Invalid(MetricWitness::Asymmetric(i, j));
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                let detour = d[(i, j)].clone() + d[(j, k)].clone();
                if !d[(i, k)].le_tol(&detour, tol) {
                    return MetricClass::Invalid(MetricWitness::Triangle(i, k, j));
                }
            }
        }
    }
    let degenerate = (0..n).any(|i| (0..n).any(|j| i != j && d[(i, j)].is_zero_tol(tol)));
    if degenerate {
        MetricClass::Semimetric
    } else {
        MetricClass::Metric
    }
}

/// `Σ_{(i,j) ∈ Z} μ_i ν_j`.
pub fn product_measure<S: Scalar>(z: &ProductSet<S>) -> S {
    sum(z.cells().map(|(i, j)| z.x.weight(i).clone() * z.y.weight(j).clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelMode {
    /// `f > t`
    Above,
    /// `f >= t`
    AtLeast,
}

pub fn level_set<S: Scalar>(f: &ProductFunction<S>, threshold: &S, mode: LevelMode) -> ProductSet<S> {
    ProductSet::from_fn(f.x.clone(), f.y.clone(), |i, j| {
        let v = &f.values[(i, j)];
        match mode {
            LevelMode::Above => v > threshold,
            LevelMode::AtLeast => v >= threshold,
        }
    })
}
